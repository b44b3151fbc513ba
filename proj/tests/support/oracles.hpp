// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, independent of the library's implementation paths:
// a hand-rolled complex QR eigensolver, LP vertex enumeration, grid/pattern
// minimizers, and eigenvalue tracking helpers for finite-difference checks.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracles {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Independent QR eigensolver (Hessenberg reduction + Wilkinson-shifted QR
// with deflation).  Eigenvalues only.
// ---------------------------------------------------------------------------

inline void hessenberg_reduce(Eigen::MatrixXcd& H) {
  const Eigen::Index n = H.rows();
  for (Eigen::Index k = 0; k < n - 2; ++k) {
    Eigen::VectorXcd x = H.col(k).segment(k + 1, n - k - 1);
    const double xnorm = x.norm();
    if (xnorm == 0.0) continue;
    Eigen::VectorXcd v = x;
    const Complex x0 = x(0);
    const double x0abs = std::abs(x0);
    const Complex phase = x0abs > 0 ? x0 / x0abs : Complex(1.0, 0.0);
    v(0) += phase * xnorm;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H <- P H P with P = I - 2 v v* acting on the trailing block.
    H.bottomRows(n - k - 1) -= 2.0 * v * (v.adjoint() * H.bottomRows(n - k - 1));
    H.rightCols(n - k - 1) -= 2.0 * (H.rightCols(n - k - 1) * v) * v.adjoint();
  }
}

inline std::vector<Complex> qr_eigenvalues(Eigen::MatrixXcd A, int max_sweeps = 30000) {
  const Eigen::Index n = A.rows();
  std::vector<Complex> out;
  if (n == 0) return out;
  hessenberg_reduce(A);

  Eigen::Index hi = n - 1;
  int sweeps = 0;
  while (hi >= 0 && sweeps < max_sweeps) {
    if (hi == 0) {
      out.push_back(A(0, 0));
      --hi;
      continue;
    }
    // Deflate when a subdiagonal entry is negligible.
    bool deflated = false;
    for (Eigen::Index k = hi; k >= 1; --k) {
      const double sub = std::abs(A(k, k - 1));
      const double scale = std::abs(A(k, k)) + std::abs(A(k - 1, k - 1));
      if (sub <= 1e-15 * std::max(scale, 1e-300)) {
        if (k == hi) {
          out.push_back(A(hi, hi));
          --hi;
          deflated = true;
        }
        break;
      }
    }
    if (deflated) continue;

    // Wilkinson shift from the trailing 2x2 of the active block.
    const Complex a = A(hi - 1, hi - 1), b = A(hi - 1, hi);
    const Complex c = A(hi, hi - 1), d = A(hi, hi);
    const Complex tr = a + d;
    const Complex disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    const Complex l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    const Complex shift = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;

    Eigen::MatrixXcd block = A.topLeftCorner(hi + 1, hi + 1);
    block.diagonal().array() -= shift;
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(block);
    const Eigen::MatrixXcd Q = qr.householderQ();
    const Eigen::MatrixXcd R =
        qr.matrixQR().triangularView<Eigen::Upper>();
    Eigen::MatrixXcd next = R * Q;
    next.diagonal().array() += shift;
    A.topLeftCorner(hi + 1, hi + 1) = next;
    ++sweeps;
  }
  // Anything left unconverged (should not happen for the sizes used here).
  for (Eigen::Index k = 0; k <= hi; ++k) out.push_back(A(k, k));
  return out;
}

// Multiset comparison: every element of a matches an unused element of b
// within tol.  Robust against ordering flips of near-tied values.
inline bool multiset_match(const std::vector<Complex>& a, const std::vector<Complex>& b,
                           double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Complex& va : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(va - b[j]) <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// LP vertex enumeration for the subproblem geometry, variables z = (dx, dg):
//   minimize dg  s.t.  g_i^T dx - dg <= b_i  and  |dx_j| <= radius.
// Enumerates all D-subsets of rows, solves, checks feasibility, returns the
// best objective.
// ---------------------------------------------------------------------------

struct LpRows {
  Eigen::MatrixXd A;  // rows: constraints a^T z <= b
  Eigen::VectorXd b;
};

inline std::optional<double> lp_vertex_enumeration(const LpRows& rows) {
  const Eigen::Index D = rows.A.cols();
  const Eigen::Index m = rows.A.rows();
  std::vector<Eigen::Index> comb(D);
  std::optional<double> best;

  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start,
                                                            Eigen::Index depth) {
    if (depth == D) {
      Eigen::MatrixXd M(D, D);
      Eigen::VectorXd rhs(D);
      for (Eigen::Index i = 0; i < D; ++i) {
        M.row(i) = rows.A.row(comb[i]);
        rhs(i) = rows.b(comb[i]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd z = lu.solve(rhs);
      for (Eigen::Index i = 0; i < m; ++i)
        if (rows.A.row(i).dot(z) > rows.b(i) + 1e-9) return;
      const double obj = z(D - 1);
      if (!best || obj < *best) best = obj;
      return;
    }
    for (Eigen::Index i = start; i <= m - (D - depth); ++i) {
      comb[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Exact convex-QP oracle by KKT active-set enumeration: for every subset of
// constraint rows solve the equality-constrained KKT system and keep
// candidates that are primal feasible with nonnegative multipliers.  Returns
// the optimal objective 1/2 z^T Q z + q^T z.
inline std::optional<double> qp_kkt_enumeration(const LpRows& rows,
                                                const Eigen::MatrixXd& Q,
                                                const Eigen::VectorXd& q) {
  const Eigen::Index D = rows.A.cols();
  const Eigen::Index m = rows.A.rows();
  std::optional<double> best;

  std::vector<Eigen::Index> subset;
  std::function<void(Eigen::Index)> rec = [&](Eigen::Index start) {
    const Eigen::Index k = static_cast<Eigen::Index>(subset.size());
    {
      Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(D + k, D + k);
      KKT.topLeftCorner(D, D) = Q;
      Eigen::VectorXd rhs(D + k);
      rhs.head(D) = -q;
      for (Eigen::Index i = 0; i < k; ++i) {
        KKT.block(D + i, 0, 1, D) = rows.A.row(subset[i]);
        KKT.block(0, D + i, D, 1) = rows.A.row(subset[i]).transpose();
        rhs(D + i) = rows.b(subset[i]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(KKT);
      if (lu.isInvertible()) {
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd z = sol.head(D);
        bool ok = true;
        for (Eigen::Index i = 0; i < m && ok; ++i)
          if (rows.A.row(i).dot(z) > rows.b(i) + 1e-9) ok = false;
        for (Eigen::Index i = 0; i < k && ok; ++i)
          if (sol(D + i) < -1e-9) ok = false;
        if (ok) {
          const double obj = 0.5 * z.dot(Q * z) + q.dot(z);
          if (!best || obj < *best) best = obj;
        }
      }
    }
    if (k == D) return;
    for (Eigen::Index i = start; i < m; ++i) {
      subset.push_back(i);
      rec(i + 1);
      subset.pop_back();
    }
  };
  rec(0);
  return best;
}

// ---------------------------------------------------------------------------
// Derivative-free minimizers used as acceptance oracles.
// ---------------------------------------------------------------------------

using Fn2 = std::function<double(double, double)>;

// Nelder-Mead in 2-D with restarts; reliable on narrow nonsmooth valleys.
inline std::pair<Eigen::Vector2d, double> nelder_mead_2d(const Fn2& f,
                                                         Eigen::Vector2d x0,
                                                         double scale = 0.05,
                                                         int rounds = 6,
                                                         int iters = 4000) {
  auto eval = [&](const Eigen::Vector2d& p) { return f(p(0), p(1)); };
  Eigen::Vector2d best_x = x0;
  double best_f = eval(x0);

  for (int round = 0; round < rounds; ++round) {
    std::array<Eigen::Vector2d, 3> v{best_x,
                                     best_x + Eigen::Vector2d(scale, 0),
                                     best_x + Eigen::Vector2d(0, scale)};
    std::array<double, 3> fv{eval(v[0]), eval(v[1]), eval(v[2])};
    for (int it = 0; it < iters; ++it) {
      std::array<int, 3> idx{0, 1, 2};
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
      const Eigen::Vector2d& xl = v[idx[0]];
      const Eigen::Vector2d& xh = v[idx[2]];
      const double fl = fv[idx[0]], fs = fv[idx[1]], fh = fv[idx[2]];
      const Eigen::Vector2d centroid = 0.5 * (v[idx[0]] + v[idx[1]]);
      if ((xh - xl).norm() < 1e-14 && std::abs(fh - fl) < 1e-15) break;

      const Eigen::Vector2d xr = centroid + (centroid - xh);
      const double fr = eval(xr);
      if (fr < fl) {
        const Eigen::Vector2d xe = centroid + 2.0 * (centroid - xh);
        const double fe = eval(xe);
        if (fe < fr) {
          v[idx[2]] = xe;
          fv[idx[2]] = fe;
        } else {
          v[idx[2]] = xr;
          fv[idx[2]] = fr;
        }
      } else if (fr < fs) {
        v[idx[2]] = xr;
        fv[idx[2]] = fr;
      } else {
        const Eigen::Vector2d xc =
            centroid + 0.5 * ((fr < fh ? xr : xh) - centroid);
        const double fc = eval(xc);
        if (fc < std::min(fr, fh)) {
          v[idx[2]] = xc;
          fv[idx[2]] = fc;
        } else {
          for (int i : {idx[1], idx[2]}) {
            v[i] = xl + 0.5 * (v[i] - xl);
            fv[i] = eval(v[i]);
          }
        }
      }
    }
    for (int i = 0; i < 3; ++i)
      if (fv[i] < best_f) {
        best_f = fv[i];
        best_x = v[i];
      }
    scale *= 0.2;
  }
  return {best_x, best_f};
}

// ---------------------------------------------------------------------------
// Eigenvalue tracking for finite-difference oracles: nearest eigenvalue by
// modulus distance.
// ---------------------------------------------------------------------------

inline Complex track_eigenvalue(const std::vector<Complex>& candidates, Complex ref) {
  Complex best = candidates.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Complex& c : candidates) {
    const double dist = std::abs(c - ref);
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random test-data generators (seeded, deterministic).
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace oracles
