// SPDX-License-Identifier: Apache-2.0

#include "specmin/delay.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace specmin {

namespace {

constexpr int kDegreeStart = 20;
constexpr int kDegreeCap = 2560;
constexpr double kStabilityTol = 1e-8;
constexpr double kNewtonResidTol = 1e-12;
constexpr double kDedupeTol = 1e-8;
constexpr int kNewtonMaxIter = 50;
constexpr int kMaxHalfPlaneDoublings = 64;

struct NewtonRoot {
  Complex lambda;
  Eigen::VectorXcd v;
};

// Smallest-singular-vector estimate of the nullspace of M.
Eigen::VectorXcd null_vector(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().col(M.cols() - 1);
}

Eigen::VectorXcd left_null_vector(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullU);
  return svd.matrixU().col(M.rows() - 1);
}

// Fixed normalization vector for the bordered Newton system; drawn once per
// call from a fixed-seed stream so results are reproducible.
Eigen::VectorXcd normalization_vector(int n, const Eigen::VectorXcd& v0) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXcd c(n);
    for (int i = 0; i < n; ++i) c(i) = Complex(unif(rng), unif(rng));
    c /= c.norm();
    if (std::abs(c.dot(v0)) > 0.1) return c;
  }
  return v0;  // v0 itself always has |v0* v0| = 1
}

// Refines (lambda, v) until the residual reaches its attainable floor, not
// just the acceptance threshold.  Near a coalescing pair the residual passes
// 1e-12 in a whole neighborhood of each root; squeezing to the floor pins
// the root far more tightly, which the degree-stability comparison needs.
bool newton_refine(const DelayFamily& fam, const Eigen::VectorXd& x, Complex seed,
                   NewtonRoot* root) {
  const int N = fam.dim();
  Complex lam = seed;
  Eigen::VectorXcd v = null_vector(lambda_matrix(fam, x, lam));
  const Eigen::VectorXcd c = normalization_vector(N, v);
  v /= c.dot(v);

  double best_resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const Eigen::MatrixXcd L = lambda_matrix(fam, x, lam);
    const Eigen::VectorXcd vhat = v / v.norm();
    const double resid = (L * vhat).norm() / (1.0 + L.norm());
    const bool improving = resid < 0.5 * best_resid;
    if (resid < best_resid) {
      best_resid = resid;
      root->lambda = lam;
      root->v = vhat;
    }
    if (best_resid <= kNewtonResidTol && !improving) return true;

    Eigen::MatrixXcd J(N + 1, N + 1);
    J.topLeftCorner(N, N) = L;
    J.topRightCorner(N, 1) = lambda_matrix_dlam(fam, x, lam) * v;
    J.bottomLeftCorner(1, N) = c.adjoint();
    J(N, N) = Complex(0.0, 0.0);

    Eigen::VectorXcd rhs(N + 1);
    rhs.head(N) = -(L * v);
    rhs(N) = Complex(1.0, 0.0) - c.dot(v);

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(J);
    if (!lu.isInvertible()) break;
    const Eigen::VectorXcd step = lu.solve(rhs);
    v += step.head(N);
    lam += step(N);
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) break;
  }
  return best_resid <= kNewtonResidTol;
}

std::vector<Complex> filter_right_of(const Eigen::VectorXcd& vals, double r) {
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i).real() >= r) out.push_back(vals(i));
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

// Every element of a has a partner in b within tol.
bool covered_by(const std::vector<Complex>& a, const std::vector<Complex>& b,
                double tol) {
  for (const Complex& va : a) {
    bool found = false;
    for (const Complex& vb : b) {
      if (std::abs(va - vb) <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

DelayFamily::DelayFamily(std::vector<Term> terms_in) : terms(std::move(terms_in)) {
  if (terms.empty()) throw InvalidInputError("DelayFamily: needs at least one term");
  if (terms.front().tau != 0.0)
    throw InvalidInputError("DelayFamily: term 0 must have tau = 0");
  const int N = terms.front().family.dim();
  const int n = terms.front().family.params();
  for (const auto& t : terms) {
    if (t.tau < 0.0) throw InvalidInputError("DelayFamily: negative delay");
    if (t.family.dim() != N || t.family.params() != n)
      throw InvalidInputError("DelayFamily: term dimension mismatch");
  }
}

double DelayFamily::max_delay() const {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, t.tau);
  return m;
}

Eigen::MatrixXcd lambda_matrix(const DelayFamily& fam, const Eigen::VectorXd& x,
                               Complex lam) {
  const int N = fam.dim();
  Eigen::MatrixXcd L = lam * Eigen::MatrixXcd::Identity(N, N);
  L -= fam.terms[0].family.evaluate(x).cast<Complex>();
  for (std::size_t j = 1; j < fam.terms.size(); ++j)
    L -= std::exp(-lam * fam.terms[j].tau) *
         fam.terms[j].family.evaluate(x).cast<Complex>();
  return L;
}

Eigen::MatrixXcd lambda_matrix_dlam(const DelayFamily& fam, const Eigen::VectorXd& x,
                                    Complex lam) {
  const int N = fam.dim();
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(N, N);
  for (std::size_t j = 1; j < fam.terms.size(); ++j)
    L += fam.terms[j].tau * std::exp(-lam * fam.terms[j].tau) *
         fam.terms[j].family.evaluate(x).cast<Complex>();
  return L;
}

Eigen::MatrixXcd lambda_matrix_d2lam(const DelayFamily& fam, const Eigen::VectorXd& x,
                                     Complex lam) {
  const int N = fam.dim();
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(N, N);
  for (std::size_t j = 1; j < fam.terms.size(); ++j)
    L -= fam.terms[j].tau * fam.terms[j].tau * std::exp(-lam * fam.terms[j].tau) *
         fam.terms[j].family.evaluate(x).cast<Complex>();
  return L;
}

Eigen::MatrixXcd lambda_matrix_dx(const DelayFamily& fam, const Eigen::VectorXd& x,
                                  Complex lam, int k) {
  (void)x;  // affine families: directions are constant
  const int N = fam.dim();
  Eigen::MatrixXcd L = -fam.terms[0].family.directions[k].cast<Complex>();
  for (std::size_t j = 1; j < fam.terms.size(); ++j)
    L -= std::exp(-lam * fam.terms[j].tau) *
         fam.terms[j].family.directions[k].cast<Complex>();
  return L;
}

namespace detail {

Eigen::MatrixXd chebyshev_diff(int degree) {
  const int d = degree;
  Eigen::VectorXd nodes(d + 1);
  for (int j = 0; j <= d; ++j) nodes(j) = std::cos(j * M_PI / d);
  Eigen::VectorXd c(d + 1);
  for (int j = 0; j <= d; ++j) c(j) = (j == 0 || j == d) ? 2.0 : 1.0;

  Eigen::MatrixXd D(d + 1, d + 1);
  for (int i = 0; i <= d; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j <= d; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = (c(i) / c(j)) * sign / (nodes(i) - nodes(j));
      row_sum += D(i, j);
    }
    D(i, i) = -row_sum;  // negative-sum trick
  }
  return D;
}

Eigen::MatrixXd generator_matrix(const DelayFamily& fam, const Eigen::VectorXd& x,
                                 int degree) {
  const int N = fam.dim();
  const int d = degree;
  const double tau_max = fam.max_delay();
  const int size = N * (d + 1);

  // Nodes s_i = (cos(i pi / d) - 1) tau_max / 2 run from 0 down to -tau_max.
  Eigen::VectorXd s(d + 1);
  for (int i = 0; i <= d; ++i) s(i) = (std::cos(i * M_PI / d) - 1.0) * tau_max / 2.0;

  const Eigen::MatrixXd D = chebyshev_diff(d) * (2.0 / tau_max);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(size, size);
  // Rows for nodes 1..d discretize the derivative along the history segment.
  for (int i = 1; i <= d; ++i)
    for (int j = 0; j <= d; ++j)
      M.block(i * N, j * N, N, N) = D(i, j) * Eigen::MatrixXd::Identity(N, N);

  // Row for node 0 applies the delay terms; values at -tau_j come from
  // barycentric Lagrange interpolation on the Chebyshev grid.
  M.block(0, 0, N, N) += fam.terms[0].family.evaluate(x);
  Eigen::VectorXd w(d + 1);
  for (int i = 0; i <= d; ++i) {
    w(i) = (i % 2 == 0) ? 1.0 : -1.0;
    if (i == 0 || i == d) w(i) *= 0.5;
  }
  for (std::size_t t = 1; t < fam.terms.size(); ++t) {
    const double target = -fam.terms[t].tau;
    const Eigen::MatrixXd Aj = fam.terms[t].family.evaluate(x);
    int exact = -1;
    for (int i = 0; i <= d; ++i)
      if (s(i) == target) {
        exact = i;
        break;
      }
    if (exact >= 0) {
      M.block(0, exact * N, N, N) += Aj;
    } else {
      Eigen::VectorXd ell(d + 1);
      double denom = 0.0;
      for (int i = 0; i <= d; ++i) {
        ell(i) = w(i) / (target - s(i));
        denom += ell(i);
      }
      ell /= denom;
      for (int i = 0; i <= d; ++i) M.block(0, i * N, N, N) += ell(i) * Aj;
    }
  }
  return M;
}

}  // namespace detail

DelayEigenResult rightmost_eigs(const DelayFamily& fam, const Eigen::VectorXd& x) {
  const double tau_max = fam.max_delay();
  return rightmost_eigs(fam, x, tau_max > 0.0 ? -1.0 / tau_max : 0.0);
}

DelayEigenResult rightmost_eigs(const DelayFamily& fam, const Eigen::VectorXd& x,
                                double r0) {
  if (!x.allFinite()) throw InvalidInputError("rightmost_eigs: non-finite point");

  // A term only couples lambda to the history when its delay is positive and
  // its matrix does not vanish at x.  Otherwise the problem is an ordinary
  // eigenproblem of the sum of the zero-delay terms.
  bool effective_delay = false;
  for (std::size_t j = 1; j < fam.terms.size(); ++j)
    if (fam.terms[j].tau > 0.0 && fam.terms[j].family.evaluate(x).norm() > 0.0)
      effective_delay = true;
  if (!effective_delay) {
    Eigen::MatrixXd A = fam.terms[0].family.evaluate(x);
    for (std::size_t j = 1; j < fam.terms.size(); ++j)
      if (fam.terms[j].tau == 0.0) A += fam.terms[j].family.evaluate(x);
    Spectrum s = eig_full(A);
    const double alpha = spectral_abscissa(s);
    double r = r0;
    while (r > alpha) r = (r < 0.0) ? 2.0 * r : -1.0;
    DelayEigenResult res;
    res.half_plane = r;
    for (auto& t : s.triples)
      if (t.lambda.real() >= r) res.triples.push_back(std::move(t));
    return res;
  }

  // Discretization spectra are r-independent; cache them across half-plane
  // updates.
  std::map<int, Eigen::VectorXcd> spectra;
  auto discretized = [&](int d) -> const Eigen::VectorXcd& {
    auto it = spectra.find(d);
    if (it != spectra.end()) return it->second;
    const Eigen::MatrixXd M = detail::generator_matrix(fam, x, d);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
      throw NumericError("rightmost_eigs: discretization eigensolve failed",
                         M.norm(), static_cast<int>(M.rows()));
    return spectra.emplace(d, es.eigenvalues()).first->second;
  };

  // Newton-refined, deduplicated roots seeded from the discretization at
  // degree d.  Seeds are taken with a small margin below r so a root that
  // sits on the half-plane boundary is handled consistently across degrees.
  auto refined_roots = [&](int d, double r) {
    const double slack = 1e-6 * (1.0 + std::abs(r));
    const std::vector<Complex> seeds = filter_right_of(discretized(d), r - slack);
    std::vector<NewtonRoot> roots;
    int converged = 0;
    for (const Complex& seed : seeds) {
      NewtonRoot root;
      if (!newton_refine(fam, x, seed, &root)) continue;
      ++converged;
      bool dup = false;
      for (const auto& kept : roots)
        if (std::abs(kept.lambda - root.lambda) < kDedupeTol) {
          dup = true;
          break;
        }
      if (!dup) roots.push_back(std::move(root));
    }
    if (!seeds.empty() && converged == 0)
      throw DelayEigenError("rightmost_eigs: Newton refinement failed on all seeds");
    return roots;
  };

  auto root_values = [](const std::vector<NewtonRoot>& roots) {
    std::vector<Complex> vals;
    vals.reserve(roots.size());
    for (const auto& root : roots) vals.push_back(root.lambda);
    return vals;
  };

  double r = r0;
  for (int doubling = 0; doubling < kMaxHalfPlaneDoublings; ++doubling) {
    // Adapt the degree until the refined root set right of r stabilizes.
    // Refined roots are compared (not raw discretization values): near a
    // coalescing pair the raw values are noise-limited well above 1e-8,
    // while the refined roots are degree-independent.
    std::vector<NewtonRoot> roots;
    bool stable = false;
    int d = kDegreeStart;
    std::vector<NewtonRoot> prev = refined_roots(d, r);
    while (2 * d <= kDegreeCap) {
      std::vector<NewtonRoot> next = refined_roots(2 * d, r);
      if (covered_by(root_values(prev), root_values(next), kStabilityTol) &&
          covered_by(root_values(next), root_values(prev), kStabilityTol)) {
        roots = std::move(next);
        stable = true;
        break;
      }
      d *= 2;
      prev = std::move(next);
    }
    if (!stable)
      throw AccuracyError("rightmost_eigs: discretization degree cap exceeded");

    bool any_right = false;
    for (const auto& root : roots)
      if (root.lambda.real() >= r) any_right = true;

    if (any_right) {
      DelayEigenResult res;
      res.half_plane = r;
      for (const auto& root : roots) {
        EigenTriple t;
        t.lambda = root.lambda;
        t.v = root.v;
        const Eigen::MatrixXcd L = lambda_matrix(fam, x, root.lambda);
        t.u = left_null_vector(L);
        t.u /= t.u.norm();
        t.condition = std::min(1.0, std::abs(t.u.dot(t.v)));
        res.triples.push_back(std::move(t));
      }
      order_by_real_part(res.triples);
      return res;
    }
    r = (r < 0.0) ? 2.0 * r : -1.0 / fam.max_delay();
  }
  throw DelayEigenError("rightmost_eigs: no eigenvalue found after doubling r");
}

Eigen::VectorXcd delay_gradient(const DelayFamily& fam, const Eigen::VectorXd& x,
                                const EigenTriple& t) {
  const int n = fam.params();
  const Eigen::MatrixXcd Lp = lambda_matrix_dlam(fam, x, t.lambda);
  const Complex denom = t.u.dot(Lp * t.v);
  const double scale = 1.0 + Lp.norm();
  if (std::abs(denom) < 1e-10 * scale)
    throw DerivativeUndefinedError(
        "delay_gradient: u* Lambda'(lambda) v is numerically zero");
  Eigen::VectorXcd g(n);
  for (int k = 0; k < n; ++k)
    g(k) = -t.u.dot(lambda_matrix_dx(fam, x, t.lambda, k) * t.v) / denom;
  return g;
}

Eigen::MatrixXcd delay_hessian(const DelayFamily& fam, const Eigen::VectorXd& x,
                               const EigenTriple& t) {
  const int n = fam.params();
  const int N = fam.dim();
  const Complex lam = t.lambda;
  const Eigen::VectorXcd& v = t.v;
  const Eigen::VectorXcd& u = t.u;

  const Eigen::MatrixXcd L = lambda_matrix(fam, x, lam);
  const Eigen::MatrixXcd Lp = lambda_matrix_dlam(fam, x, lam);
  const Eigen::MatrixXcd Lpp = lambda_matrix_d2lam(fam, x, lam);
  const Complex denom = u.dot(Lp * v);
  if (std::abs(denom) < 1e-10 * (1.0 + Lp.norm()))
    throw DerivativeUndefinedError(
        "delay_hessian: u* Lambda'(lambda) v is numerically zero");

  // Joint sensitivity solve per parameter: unknowns (dv/dx_k, dlambda/dx_k).
  Eigen::MatrixXcd bordered(N + 1, N + 1);
  bordered.topLeftCorner(N, N) = L;
  bordered.topRightCorner(N, 1) = Lp * v;
  bordered.bottomLeftCorner(1, N) = 2.0 * v.adjoint();
  bordered(N, N) = Complex(0.0, 0.0);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(bordered);
  if (!lu.isInvertible())
    throw DerivativeUndefinedError("delay_hessian: singular bordered system");

  std::vector<Eigen::MatrixXcd> Lx(n);
  std::vector<Eigen::VectorXcd> dv(n);
  Eigen::VectorXcd dlam(n);
  for (int k = 0; k < n; ++k) {
    Lx[k] = lambda_matrix_dx(fam, x, lam, k);
    Eigen::VectorXcd rhs(N + 1);
    rhs.head(N) = -(Lx[k] * v);
    rhs(N) = Complex(0.0, 0.0);
    const Eigen::VectorXcd sol = lu.solve(rhs);
    dv[k] = sol.head(N);
    dlam(k) = sol(N);
  }

  // d Lambda_x / d lambda for affine families.
  std::vector<Eigen::MatrixXcd> Lx_lam(n);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXcd Mk = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t j = 1; j < fam.terms.size(); ++j)
      Mk += fam.terms[j].tau * std::exp(-lam * fam.terms[j].tau) *
            fam.terms[j].family.directions[k].cast<Complex>();
    Lx_lam[k] = Mk;
  }

  // Differentiating (Lp dlam_k + Lx_k) v + L dv_k = 0 once more and applying
  // u* (which annihilates L dv_kl) gives, with Lambda_xx = 0:
  //   dlam_kl = -[u*(Lpp dlam_k dlam_l + Lx_lam_l dlam_k + Lx_lam_k dlam_l) v
  //              + u*(Lp dlam_k + Lx_k) dv_l + u*(Lp dlam_l + Lx_l) dv_k]
  //             / (u* Lp v).
  Eigen::MatrixXcd H(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      Complex num = u.dot(Lpp * v) * dlam(k) * dlam(l);
      num += u.dot(Lx_lam[l] * v) * dlam(k);
      num += u.dot(Lx_lam[k] * v) * dlam(l);
      num += u.dot(Lp * dv[l]) * dlam(k) + u.dot(Lx[k] * dv[l]);
      num += u.dot(Lp * dv[k]) * dlam(l) + u.dot(Lx[l] * dv[k]);
      const Complex h = -num / denom;
      H(k, l) = h;
      H(l, k) = h;
    }
  return H;
}

}  // namespace specmin
