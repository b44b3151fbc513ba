// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "specmin/errors.hpp"

namespace specmin {

using Complex = std::complex<double>;

/// An eigenvalue with paired right and left eigenvectors.
///
/// `v` and `u` are unit 2-norm.  `condition` is |u*v| in [0, 1]; it vanishes
/// for defective (non-semi-simple) eigenvalues, where the eigenvalue
/// derivative formulas break down.
struct EigenTriple {
  Complex lambda;
  Eigen::VectorXcd v;  // right: F v = lambda v
  Eigen::VectorXcd u;  // left:  u* F = lambda u*
  double condition = 0.0;

  [[nodiscard]] bool is_semi_simple() const { return condition >= kSemiSimpleTol; }

  /// Below this |u*v| the triple is treated as defective.
  static constexpr double kSemiSimpleTol = 1e-8;
};

/// Full spectrum ordered by decreasing real part (ties: larger imaginary
/// part first, then original position).
struct Spectrum {
  std::vector<EigenTriple> triples;
  int source_dim = 0;

  [[nodiscard]] bool empty() const { return triples.empty(); }
  [[nodiscard]] std::size_t size() const { return triples.size(); }
  const EigenTriple& top() const { return triples.front(); }
};

/// Dense nonsymmetric eigendecomposition with left and right eigenvectors.
///
/// Left eigenvectors come from the decomposition of the conjugate transpose
/// and are paired to right eigenvalues greedily by eigenvalue proximity.
Spectrum eig_full(const Eigen::MatrixXcd& M);

/// Convenience overload for real matrices.
Spectrum eig_full(const Eigen::MatrixXd& M);

/// Largest real part over the spectrum.
double spectral_abscissa(const Spectrum& s);

/// Moore-Penrose pseudoinverse; singular values below tol * sigma_max are
/// treated as zero.  tol must be positive.
Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& M, double tol);

/// Pseudoinverse with the default rank cutoff N * machine-epsilon.
Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& M);

/// Sorts triples by (Re desc, Im desc, original index) in place.
void order_by_real_part(std::vector<EigenTriple>& triples);

}  // namespace specmin
