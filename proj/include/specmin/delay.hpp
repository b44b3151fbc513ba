// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "specmin/eigen_core.hpp"
#include "specmin/matrix_family.hpp"

namespace specmin {

/// Time-delay system v'(t) = sum_j A_j(x) v(t - tau_j) with affine
/// coefficient families.  Term 0 carries tau = 0.
struct DelayFamily {
  struct Term {
    MatrixFamily family;
    double tau = 0.0;
  };
  std::vector<Term> terms;

  DelayFamily() = default;
  explicit DelayFamily(std::vector<Term> terms_in);

  [[nodiscard]] int dim() const { return terms.front().family.dim(); }
  [[nodiscard]] int params() const { return terms.front().family.params(); }
  [[nodiscard]] int delay_count() const { return static_cast<int>(terms.size()) - 1; }
  [[nodiscard]] double max_delay() const;
};

/// Eigenvalues of the nonlinear problem det(Lambda(lambda; x)) = 0 found to
/// the right of the half-plane Re >= half_plane, with left/right nullspace
/// vectors of Lambda attached, ordered by decreasing real part.
struct DelayEigenResult {
  std::vector<EigenTriple> triples;
  double half_plane = 0.0;

  [[nodiscard]] Spectrum to_spectrum(int source_dim) const {
    Spectrum s;
    s.triples = triples;
    s.source_dim = source_dim;
    return s;
  }
};

/// Characteristic matrix Lambda(lambda; x) = lambda I - A_0(x)
/// - sum_{j>=1} A_j(x) e^{-lambda tau_j}.
Eigen::MatrixXcd lambda_matrix(const DelayFamily& fam, const Eigen::VectorXd& x,
                               Complex lam);

/// d Lambda / d lambda = I + sum_{j>=1} tau_j e^{-lambda tau_j} A_j(x).
Eigen::MatrixXcd lambda_matrix_dlam(const DelayFamily& fam, const Eigen::VectorXd& x,
                                    Complex lam);

/// d2 Lambda / d lambda2 = -sum_{j>=1} tau_j^2 e^{-lambda tau_j} A_j(x).
Eigen::MatrixXcd lambda_matrix_d2lam(const DelayFamily& fam, const Eigen::VectorXd& x,
                                     Complex lam);

/// d Lambda / d x_k = -(dA_0/dx_k + sum_{j>=1} dA_j/dx_k e^{-lambda tau_j}).
Eigen::MatrixXcd lambda_matrix_dx(const DelayFamily& fam, const Eigen::VectorXd& x,
                                  Complex lam, int k);

/// All eigenvalues right of a shifting half-plane.  Starting from r0
/// (default -1/tau_max), seeds come from a Chebyshev discretization of the
/// solution-operator generator (degree adapted by doubling until the
/// candidates right of r are stable), each seed is Newton-refined on the
/// bordered system [Lambda v = 0; c* v = 1], refined roots are deduplicated,
/// and r doubles toward -infinity until at least one eigenvalue appears.
DelayEigenResult rightmost_eigs(const DelayFamily& fam, const Eigen::VectorXd& x,
                                double r0);
DelayEigenResult rightmost_eigs(const DelayFamily& fam, const Eigen::VectorXd& x);

/// Gradient of an eigenvalue surface of the delay problem:
/// component k is u* (dA_0/dx_k + sum_j dA_j/dx_k e^{-lambda tau_j}) v
/// divided by u* (I + sum_j tau_j e^{-lambda tau_j} A_j) v.
Eigen::VectorXcd delay_gradient(const DelayFamily& fam, const Eigen::VectorXd& x,
                                const EigenTriple& t);

/// Hessian of an eigenvalue surface of the delay problem.  dv/dx_k and
/// dlambda/dx_k come from the bordered solve
///   [Lambda, dLambda/dlambda v; 2 v*, 0] [dv; dlambda] = [-dLambda/dx_k v; 0]
/// and the Hessian entries follow from differentiating Lambda v = 0 twice.
Eigen::MatrixXcd delay_hessian(const DelayFamily& fam, const Eigen::VectorXd& x,
                               const EigenTriple& t);

namespace detail {
/// Chebyshev differentiation matrix on d+1 extreme points of [-1, 1]
/// (Trefethen ordering x_j = cos(j pi / d)).
Eigen::MatrixXd chebyshev_diff(int degree);

/// Generator discretization whose eigenvalues approximate the delay spectrum.
Eigen::MatrixXd generator_matrix(const DelayFamily& fam, const Eigen::VectorXd& x,
                                 int degree);
}  // namespace detail

}  // namespace specmin
