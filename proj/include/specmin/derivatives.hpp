// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "specmin/eigen_core.hpp"
#include "specmin/matrix_family.hpp"

namespace specmin {

/// Linearization of one eigenvalue surface: Re(lambda) and its gradient at
/// a base point.  Memory entries are SurfaceCuts anchored at rejected trial
/// points.
struct SurfaceCut {
  Eigen::VectorXd base_point;
  double value = 0.0;
  Eigen::VectorXd gradient;

  /// Affine model value at x.
  [[nodiscard]] double eval(const Eigen::VectorXd& x) const {
    return value + gradient.dot(x - base_point);
  }
};

/// Gradient of an eigenvalue surface of an affine family:
/// component k is u* A_k v / (u* v).
///
/// Throws DerivativeUndefinedError when the triple is not semi-simple.
Eigen::VectorXcd eig_gradient(const MatrixFamily& fam, const EigenTriple& t);

/// Hessian of an eigenvalue surface of an affine family, symmetrized:
/// entry (k, l) is [u* A_k K P K A_l v + u* A_l K P K A_k v] / (u* v)
/// with K = I - v u*/(u* v) and P the pseudoinverse of (lambda I - F(x)).
/// The affine parameterization contributes no d2F/dx2 term.
Eigen::MatrixXcd eig_hessian(const MatrixFamily& fam, const EigenTriple& t,
                             const Eigen::MatrixXd& F_at_x);

/// Builds the cut {x, Re(lambda), Re(gradient)} for a surface at x.
SurfaceCut make_cut(const Eigen::VectorXd& x, const EigenTriple& t,
                    const Eigen::VectorXcd& g);

/// Drops cuts whose (value, gradient) agree with an earlier cut to tol;
/// conjugate-pair surfaces collapse to a single row.  Keeps first occurrences
/// and preserves order.
std::vector<SurfaceCut> dedupe_cuts(const std::vector<SurfaceCut>& cuts,
                                    double tol = 1e-10);

}  // namespace specmin
