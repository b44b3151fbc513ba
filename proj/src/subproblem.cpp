// SPDX-License-Identifier: Apache-2.0

#include "specmin/subproblem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace specmin {

namespace {

constexpr double kActTol = 1e-9;    // constraint activity
constexpr double kMultTol = 1e-10;  // multiplier sign test
constexpr double kDirTol = 1e-12;   // ratio-test denominator
constexpr double kEpsHessian = 1e-8;

// Inequality system a_i^T z <= b_i plus equality rows pinned during
// lexicographic refinement.  Rows are scaled to unit inf-norm.
struct ConstraintSet {
  Eigen::MatrixXd A;   // inequality rows
  Eigen::VectorXd b;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;

  [[nodiscard]] Eigen::Index dim() const { return A.cols(); }
  [[nodiscard]] Eigen::Index n_ineq() const { return A.rows(); }
  [[nodiscard]] Eigen::Index n_eq() const { return Aeq.rows(); }

  void add_equality(const Eigen::RowVectorXd& row, double rhs) {
    Aeq.conservativeResize(Aeq.rows() + 1, dim());
    Aeq.row(Aeq.rows() - 1) = row;
    beq.conservativeResize(beq.size() + 1);
    beq(beq.size() - 1) = rhs;
  }
};

// Builds the row system for an instance in box units w = dx / radius, so
// the geometry stays O(1) however small the trust region gets.  Variables
// z = (w, dgamma).  Cut i: radius g_i^T w - dgamma <= alpha_k - c_i with
// c_i = cut.eval(x_k).  Box: |w_j| <= 1.  Cut rows come first so active-set
// indices map directly onto cut indices.
ConstraintSet build_rows(const SubproblemInstance& inst, int* n_cuts_out) {
  const int n = static_cast<int>(inst.x_k.size());
  const int m_cur = static_cast<int>(inst.current_cuts.size());
  const int m_mem = static_cast<int>(inst.memory_cuts.size());
  const int m = m_cur + m_mem;

  ConstraintSet cs;
  cs.A.resize(m + 2 * n, n + 1);
  cs.b.resize(m + 2 * n);
  cs.Aeq.resize(0, n + 1);
  cs.beq.resize(0);

  auto put_cut = [&](int row, const SurfaceCut& cut) {
    Eigen::RowVectorXd a(n + 1);
    a.head(n) = inst.radius * cut.gradient.transpose();
    a(n) = -1.0;
    const double rhs = inst.alpha_k - cut.eval(inst.x_k);
    const double scale = a.lpNorm<Eigen::Infinity>();
    cs.A.row(row) = a / scale;
    cs.b(row) = rhs / scale;
  };
  for (int i = 0; i < m_cur; ++i) put_cut(i, inst.current_cuts[i]);
  for (int i = 0; i < m_mem; ++i) put_cut(m_cur + i, inst.memory_cuts[i]);

  for (int j = 0; j < n; ++j) {
    cs.A.row(m + 2 * j).setZero();
    cs.A(m + 2 * j, j) = 1.0;
    cs.b(m + 2 * j) = 1.0;
    cs.A.row(m + 2 * j + 1).setZero();
    cs.A(m + 2 * j + 1, j) = -1.0;
    cs.b(m + 2 * j + 1) = 1.0;
  }
  *n_cuts_out = m;
  return cs;
}

double gamma_feasible_start(const SubproblemInstance& inst) {
  double g = 0.0;
  for (const auto& c : inst.current_cuts)
    g = std::max(g, c.eval(inst.x_k) - inst.alpha_k);
  for (const auto& c : inst.memory_cuts)
    g = std::max(g, c.eval(inst.x_k) - inst.alpha_k);
  return g;
}

void validate_instance(const SubproblemInstance& inst) {
  if (!(inst.radius > 0.0))
    throw InvalidInputError("subproblem: radius must be positive");
  if (inst.current_cuts.empty())
    throw InvalidInputError("subproblem: needs at least one current cut");
  const int n = static_cast<int>(inst.x_k.size());
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& c : inst.current_cuts) {
    if (c.gradient.size() != n || c.base_point.size() != n)
      throw InvalidInputError("subproblem: cut dimension mismatch");
    closest = std::min(closest, std::abs(c.value - inst.alpha_k));
  }
  for (const auto& c : inst.memory_cuts)
    if (c.gradient.size() != n || c.base_point.size() != n)
      throw InvalidInputError("subproblem: memory cut dimension mismatch");
  if (closest > 1e-9 * std::max(1.0, std::abs(inst.alpha_k)))
    throw InvalidInputError("subproblem: no current cut matches alpha_k");
}

// ---------------------------------------------------------------------------
// Active-set LP over {A z <= b, Aeq z = beq}: vertex-walking with Bland's
// rule.  Equality rows never leave the working set.
// ---------------------------------------------------------------------------

class ActiveSetLp {
public:
  ActiveSetLp(const ConstraintSet& cs, Eigen::VectorXd z)
      : cs_(cs), z_(std::move(z)), dim_(cs.dim()) {}

  // Minimizes c^T z from the stored feasible point; the point is updated.
  void minimize(const Eigen::VectorXd& c) {
    build_initial_basis(c);
    const int cap = 20000;
    for (int iter = 0; iter < cap; ++iter) {
      const Eigen::MatrixXd AW = basis_matrix();
      const Eigen::VectorXd y =
          AW.transpose().colPivHouseholderQr().solve(c);
      int drop_pos = -1;
      for (std::size_t p = 0; p < working_.size(); ++p) {
        if (working_[p] < cs_.n_eq()) continue;  // equalities stay
        if (y(static_cast<Eigen::Index>(p)) > kMultTol) {
          drop_pos = static_cast<int>(p);
          break;  // Bland: working set is kept sorted by row id
        }
      }
      if (drop_pos < 0) return;  // all inequality multipliers valid

      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_);
      rhs(drop_pos) = -1.0;
      const Eigen::VectorXd d = AW.colPivHouseholderQr().solve(rhs);

      const auto [t, blocker] = ratio_test(d);
      if (blocker < 0)
        throw SubproblemFailureError("LP: unbounded ray encountered");
      z_ += t * d;
      working_.erase(working_.begin() + drop_pos);
      insert_row(blocker);
    }
    throw SubproblemFailureError("LP: iteration cap exceeded");
  }

  [[nodiscard]] const Eigen::VectorXd& point() const { return z_; }

private:
  [[nodiscard]] Eigen::RowVectorXd row(Eigen::Index id) const {
    return id < cs_.n_eq() ? cs_.Aeq.row(id) : cs_.A.row(id - cs_.n_eq());
  }
  [[nodiscard]] double rhs(Eigen::Index id) const {
    return id < cs_.n_eq() ? cs_.beq(id) : cs_.b(id - cs_.n_eq());
  }

  [[nodiscard]] Eigen::MatrixXd basis_matrix() const {
    Eigen::MatrixXd AW(working_.size(), dim_);
    for (std::size_t p = 0; p < working_.size(); ++p)
      AW.row(static_cast<Eigen::Index>(p)) = row(working_[p]);
    return AW;
  }

  void insert_row(Eigen::Index id) {
    auto it = std::lower_bound(working_.begin(), working_.end(), id);
    working_.insert(it, id);
  }

  // Largest feasible step along d; returns (t, blocking row id) with the
  // lowest row id among (near-)ties.  blocker = -1 when unbounded.
  std::pair<double, Eigen::Index> ratio_test(const Eigen::VectorXd& d) const {
    double best_t = std::numeric_limits<double>::infinity();
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < cs_.n_ineq(); ++j) {
      const Eigen::Index id = cs_.n_eq() + j;
      if (std::binary_search(working_.begin(), working_.end(), id)) continue;
      const double denom = cs_.A.row(j).dot(d);
      if (denom <= kDirTol) continue;
      const double num = std::max(0.0, cs_.b(j) - cs_.A.row(j).dot(z_));
      const double t = num / denom;
      if (t < best_t - 1e-12) {  // ascending ids keep the lowest on ties
        best_t = t;
        best = id;
      }
    }
    return {best == -1 ? 0.0 : best_t, best};
  }

  // Collect an independent active basis at z_, then walk to a vertex.
  void build_initial_basis(const Eigen::VectorXd& c) {
    working_.clear();
    Eigen::MatrixXd rows(0, dim_);
    auto try_add = [&](Eigen::Index id) {
      Eigen::MatrixXd cand(rows.rows() + 1, dim_);
      cand.topRows(rows.rows()) = rows;
      cand.row(rows.rows()) = row(id);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cand.transpose());
      if (qr.rank() == cand.rows()) {
        rows = cand;
        insert_row(id);
        return true;
      }
      return false;
    };

    for (Eigen::Index id = 0; id < cs_.n_eq(); ++id)
      if (!try_add(id))
        throw SubproblemFailureError("LP: dependent equality rows");
    for (Eigen::Index j = 0; j < cs_.n_ineq() && rows.rows() < dim_; ++j) {
      const double resid = cs_.b(j) - cs_.A.row(j).dot(z_);
      if (std::abs(resid) <= kActTol * (1.0 + std::abs(cs_.b(j))))
        try_add(cs_.n_eq() + j);
    }

    // Purification: move along null directions (never uphill) until a
    // full basis is active.
    while (rows.rows() < dim_) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(rows);
      lu.setThreshold(1e-10);
      Eigen::MatrixXd kernel = rows.rows() == 0
                                   ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim_, dim_))
                                   : Eigen::MatrixXd(lu.kernel());
      Eigen::VectorXd d = kernel.col(0);
      d /= d.lpNorm<Eigen::Infinity>();
      if (c.dot(d) > 0) d = -d;

      auto [t, blocker] = ratio_test(d);
      if (blocker < 0 && std::abs(c.dot(d)) <= kMultTol) {
        d = -d;
        std::tie(t, blocker) = ratio_test(d);
      }
      if (blocker < 0)
        throw SubproblemFailureError("LP: unbounded purification direction");
      z_ += t * d;
      Eigen::MatrixXd cand(rows.rows() + 1, dim_);
      cand.topRows(rows.rows()) = rows;
      cand.row(rows.rows()) = row(blocker);
      rows = cand;
      insert_row(blocker);
    }
  }

  const ConstraintSet& cs_;
  Eigen::VectorXd z_;
  Eigen::Index dim_;
  std::vector<Eigen::Index> working_;  // sorted row ids; equalities first ids
};

std::vector<int> tight_cuts(const ConstraintSet& cs, const Eigen::VectorXd& z,
                            int n_cuts) {
  std::vector<int> out;
  for (int i = 0; i < n_cuts; ++i) {
    const double resid = cs.b(i) - cs.A.row(i).dot(z);
    if (std::abs(resid) <= 1e-8 * (1.0 + std::abs(cs.b(i)))) out.push_back(i);
  }
  return out;
}

void check_feasible(const ConstraintSet& cs, const Eigen::VectorXd& z) {
  for (Eigen::Index i = 0; i < cs.n_ineq(); ++i)
    if (cs.A.row(i).dot(z) > cs.b(i) + 1e-7 * (1.0 + std::abs(cs.b(i))))
      throw SubproblemFailureError("subproblem: solution violates a constraint");
}

}  // namespace

SubproblemSolution solve_lp(const SubproblemInstance& inst) {
  validate_instance(inst);
  if (inst.hessian.has_value())
    throw InvalidInputError("solve_lp: instance carries a Hessian");
  const int n = static_cast<int>(inst.x_k.size());

  int n_cuts = 0;
  ConstraintSet cs = build_rows(inst, &n_cuts);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n + 1);
  z(n) = gamma_feasible_start(inst);

  // Stage 0: minimize dgamma.  Stages j pin the previous coordinates and
  // minimize dx_j, producing the lexicographically smallest optimal dx.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c(n) = 1.0;
  ActiveSetLp lp0(cs, z);
  lp0.minimize(c);
  z = lp0.point();
  const double gamma_star = z(n);

  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd pin = Eigen::RowVectorXd::Zero(n + 1);
    const int pinned = (j == 0) ? n : j - 1;
    pin(pinned) = 1.0;
    cs.add_equality(pin, z(pinned));
    Eigen::VectorXd cj = Eigen::VectorXd::Zero(n + 1);
    cj(j) = 1.0;
    ActiveSetLp lp(cs, z);
    lp.minimize(cj);
    z = lp.point();
  }

  check_feasible(cs, z);
  SubproblemSolution sol;
  sol.dx = inst.radius * z.head(n);
  sol.dgamma = gamma_star;
  sol.predicted_value = gamma_star;
  sol.active_set = tight_cuts(cs, z, n_cuts);
  return sol;
}

SubproblemSolution solve_qp(const SubproblemInstance& inst) {
  validate_instance(inst);
  if (!inst.hessian.has_value())
    throw InvalidInputError("solve_qp: instance has no Hessian");
  const int n = static_cast<int>(inst.x_k.size());
  const Eigen::MatrixXd& H_raw = *inst.hessian;
  if (H_raw.rows() != n || H_raw.cols() != n)
    throw InvalidInputError("solve_qp: Hessian dimension mismatch");
  if ((H_raw - H_raw.transpose()).lpNorm<Eigen::Infinity>() >
      1e-12 * std::max(1.0, H_raw.lpNorm<Eigen::Infinity>()))
    throw InvalidInputError("solve_qp: Hessian is not symmetric");

  Eigen::MatrixXd H = 0.5 * (H_raw + H_raw.transpose());
  double shift = 0.0;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double lam_min = es.eigenvalues().minCoeff();
    shift = std::max(0.0, kEpsHessian - lam_min);
    H += shift * Eigen::MatrixXd::Identity(n, n);
  }

  int n_cuts = 0;
  const ConstraintSet cs = build_rows(inst, &n_cuts);
  const Eigen::Index D = n + 1;

  // Objective in box units w = dx / radius:
  // 1/2 z^T Q z + q^T z with Q = diag(radius^2 H, 0), q = e_gamma.
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(D, D);
  Q.topLeftCorner(n, n) = inst.radius * inst.radius * H;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(D);
  q(n) = 1.0;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(D);
  z(n) = gamma_feasible_start(inst);

  std::vector<Eigen::Index> working;  // sorted inequality row indices
  auto in_working = [&](Eigen::Index j) {
    return std::binary_search(working.begin(), working.end(), j);
  };
  auto has_cut_row = [&] {
    return !working.empty() && working.front() < n_cuts;
  };

  const int cap = 1000 + 50 * static_cast<int>(cs.n_ineq());
  Eigen::VectorXd mu;  // multipliers for the working set
  bool done = false;
  for (int iter = 0; iter < cap && !done; ++iter) {
    Eigen::VectorXd p(D);
    mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(working.size()));

    if (!has_cut_row()) {
      // No curvature along gamma in the working set: descend along -e_gamma
      // until a cut blocks (one always does).
      p.setZero();
      p(n) = -1.0;
    } else {
      const Eigen::Index W = static_cast<Eigen::Index>(working.size());
      Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(D + W, D + W);
      KKT.topLeftCorner(D, D) = Q;
      for (Eigen::Index pidx = 0; pidx < W; ++pidx) {
        KKT.block(D + pidx, 0, 1, D) = cs.A.row(working[pidx]);
        KKT.block(0, D + pidx, D, 1) = cs.A.row(working[pidx]).transpose();
      }
      Eigen::VectorXd rhs(D + W);
      rhs.head(D) = -(Q * z + q);
      rhs.tail(W).setZero();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(KKT);
      if (!lu.isInvertible())
        throw SubproblemFailureError("QP: singular KKT system");
      const Eigen::VectorXd sol = lu.solve(rhs);
      p = sol.head(D);
      mu = sol.tail(W);

      if (p.lpNorm<Eigen::Infinity>() <= 1e-11 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
        int drop = -1;
        for (std::size_t pi = 0; pi < working.size(); ++pi)
          if (mu(static_cast<Eigen::Index>(pi)) < -kMultTol) {
            drop = static_cast<int>(pi);
            break;
          }
        if (drop < 0) {
          done = true;
        } else {
          working.erase(working.begin() + drop);
        }
        continue;
      }
    }

    // Full EQP steps are capped at 1; the gamma-descent ray is not.
    const double t_cap = has_cut_row() ? 1.0 : std::numeric_limits<double>::infinity();
    double t_block = std::numeric_limits<double>::infinity();
    Eigen::Index blocker = -1;
    for (Eigen::Index j = 0; j < cs.n_ineq(); ++j) {
      if (in_working(j)) continue;
      const double denom = cs.A.row(j).dot(p);
      if (denom <= kDirTol) continue;
      const double num = std::max(0.0, cs.b(j) - cs.A.row(j).dot(z));
      const double tj = num / denom;
      if (tj < t_block - 1e-14) {  // ascending j keeps the lowest id on ties
        t_block = tj;
        blocker = j;
      }
    }
    if (blocker < 0 && !std::isfinite(t_cap))
      throw SubproblemFailureError("QP: no cut blocks the gamma descent");
    const double t = std::min(t_cap, t_block);
    z += t * p;
    if (blocker >= 0 && t_block <= t_cap) {
      working.insert(std::lower_bound(working.begin(), working.end(), blocker),
                     blocker);
    }
  }
  if (!done) throw SubproblemFailureError("QP: iteration cap exceeded");

  check_feasible(cs, z);

  // Stationarity residual of the convex program at the final point.
  Eigen::VectorXd grad = Q * z + q;
  for (std::size_t pi = 0; pi < working.size(); ++pi)
    grad += mu(static_cast<Eigen::Index>(pi)) * cs.A.row(working[pi]).transpose();

  SubproblemSolution sol;
  sol.dx = inst.radius * z.head(n);
  sol.dgamma = z(n);
  sol.predicted_value = z(n) + 0.5 * sol.dx.dot(H * sol.dx);
  sol.active_set = tight_cuts(cs, z, n_cuts);
  sol.hessian_shift = shift;
  sol.kkt_residual = grad.lpNorm<Eigen::Infinity>();
  return sol;
}

}  // namespace specmin
