// SPDX-License-Identifier: Apache-2.0

#include "specmin/eigen_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>
#include <numeric>

namespace specmin {

namespace {

// Stable sort of indices by (Re desc, Im desc, index asc).
std::vector<int> real_part_order(const Eigen::VectorXcd& vals) {
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (vals(a).real() != vals(b).real()) return vals(a).real() > vals(b).real();
    if (vals(a).imag() != vals(b).imag()) return vals(a).imag() > vals(b).imag();
    return a < b;
  });
  return idx;
}

}  // namespace

void order_by_real_part(std::vector<EigenTriple>& triples) {
  std::stable_sort(triples.begin(), triples.end(),
                   [](const EigenTriple& a, const EigenTriple& b) {
                     if (a.lambda.real() != b.lambda.real())
                       return a.lambda.real() > b.lambda.real();
                     return a.lambda.imag() > b.lambda.imag();
                   });
}

Spectrum eig_full(const Eigen::MatrixXcd& M) {
  if (M.rows() != M.cols())
    throw InvalidInputError("eig_full: matrix is not square");
  if (!M.allFinite())
    throw InvalidInputError("eig_full: matrix has non-finite entries");
  const int n = static_cast<int>(M.rows());
  if (n == 0) throw InvalidInputError("eig_full: empty matrix");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(M, /*computeEigenvectors=*/true);
  if (right.info() != Eigen::Success)
    throw NumericError("eig_full: eigendecomposition did not converge", M.norm(), n);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> left(M.adjoint(), true);
  if (left.info() != Eigen::Success)
    throw NumericError("eig_full: adjoint eigendecomposition did not converge",
                       M.norm(), n);

  const Eigen::VectorXcd rvals = right.eigenvalues();
  const Eigen::VectorXcd lvals = left.eigenvalues();

  // Process right eigenvalues in the final (deterministic) order and pair
  // each to the nearest unused left eigenvalue of M*, i.e. conj(lambda).
  const std::vector<int> order = real_part_order(rvals);
  std::vector<bool> used(n, false);

  Spectrum s;
  s.source_dim = n;
  s.triples.reserve(n);
  for (int i : order) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dist = std::abs(lvals(j) - std::conj(rvals(i)));
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    used[best] = true;

    EigenTriple t;
    t.lambda = rvals(i);
    t.v = right.eigenvectors().col(i);
    t.u = left.eigenvectors().col(best);
    t.v /= t.v.norm();
    t.u /= t.u.norm();
    t.condition = std::min(1.0, std::abs(t.u.dot(t.v)));
    s.triples.push_back(std::move(t));
  }
  return s;
}

Spectrum eig_full(const Eigen::MatrixXd& M) {
  return eig_full(Eigen::MatrixXcd(M.cast<Complex>()));
}

double spectral_abscissa(const Spectrum& s) {
  if (s.empty()) throw InvalidInputError("spectral_abscissa: empty spectrum");
  return s.triples.front().lambda.real();
}

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& M, double tol) {
  if (tol <= 0.0) throw InvalidInputError("pseudo_inverse: tol must be positive");
  if (!M.allFinite())
    throw InvalidInputError("pseudo_inverse: matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sig = svd.singularValues();
  const double cutoff = sig.size() > 0 ? tol * sig(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sig.size());
  for (Eigen::Index i = 0; i < sig.size(); ++i)
    if (sig(i) > cutoff && sig(i) > 0.0) inv(i) = 1.0 / sig(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& M) {
  const double tol =
      static_cast<double>(std::max(M.rows(), M.cols())) *
      std::numeric_limits<double>::epsilon();
  return pseudo_inverse(M, tol);
}

}  // namespace specmin
