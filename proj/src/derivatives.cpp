// SPDX-License-Identifier: Apache-2.0

#include "specmin/derivatives.hpp"

namespace specmin {

namespace {

void require_semi_simple(const EigenTriple& t, const char* where) {
  if (!t.is_semi_simple())
    throw DerivativeUndefinedError(std::string(where) +
                                   ": eigenvalue is not semi-simple (|u*v| = " +
                                   std::to_string(t.condition) + ")");
}

}  // namespace

Eigen::VectorXcd eig_gradient(const MatrixFamily& fam, const EigenTriple& t) {
  require_semi_simple(t, "eig_gradient");
  const Complex uv = t.u.dot(t.v);
  Eigen::VectorXcd g(fam.params());
  for (int k = 0; k < fam.params(); ++k)
    g(k) = t.u.dot(fam.directions[k].cast<Complex>() * t.v) / uv;
  return g;
}

Eigen::MatrixXcd eig_hessian(const MatrixFamily& fam, const EigenTriple& t,
                             const Eigen::MatrixXd& F_at_x) {
  require_semi_simple(t, "eig_hessian");
  const int n = fam.params();
  const int N = fam.dim();
  const Complex uv = t.u.dot(t.v);

  const Eigen::MatrixXcd K =
      Eigen::MatrixXcd::Identity(N, N) - (t.v * t.u.adjoint()) / uv;
  const Eigen::MatrixXcd P = pseudo_inverse(
      (t.lambda * Eigen::MatrixXcd::Identity(N, N) - F_at_x.cast<Complex>()).eval());

  // s_k = K P K A_k v  and  r_k = u* A_k, so that
  // H(k,l) = (r_k s_l + r_l s_k) / (u* v).
  std::vector<Eigen::VectorXcd> s(n);
  std::vector<Eigen::RowVectorXcd> r(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXcd Ak = fam.directions[k].cast<Complex>();
    s[k] = K * (P * (K * (Ak * t.v)));
    r[k] = t.u.adjoint() * Ak;
  }

  Eigen::MatrixXcd H(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      const Complex h = (r[k] * s[l] + r[l] * s[k]).value() / uv;
      H(k, l) = h;
      H(l, k) = h;
    }
  return H;
}

SurfaceCut make_cut(const Eigen::VectorXd& x, const EigenTriple& t,
                    const Eigen::VectorXcd& g) {
  SurfaceCut cut;
  cut.base_point = x;
  cut.value = t.lambda.real();
  cut.gradient = g.real();
  return cut;
}

std::vector<SurfaceCut> dedupe_cuts(const std::vector<SurfaceCut>& cuts, double tol) {
  std::vector<SurfaceCut> out;
  out.reserve(cuts.size());
  for (const auto& c : cuts) {
    bool duplicate = false;
    for (const auto& kept : out) {
      if (std::abs(c.value - kept.value) <= tol &&
          (c.gradient - kept.gradient).lpNorm<Eigen::Infinity>() <= tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(c);
  }
  return out;
}

}  // namespace specmin
