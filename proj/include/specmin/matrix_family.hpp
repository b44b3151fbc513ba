// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "specmin/errors.hpp"

namespace specmin {

/// Affinely parameterized real matrix family F(x) = base + sum_k x_k * directions[k].
///
/// The family is affine, so dF/dx_k = directions[k] is constant and the
/// second derivative of F vanishes.
struct MatrixFamily {
  Eigen::MatrixXd base;
  std::vector<Eigen::MatrixXd> directions;

  MatrixFamily() = default;
  MatrixFamily(Eigen::MatrixXd base_in, std::vector<Eigen::MatrixXd> dirs);

  [[nodiscard]] int dim() const { return static_cast<int>(base.rows()); }
  [[nodiscard]] int params() const { return static_cast<int>(directions.size()); }

  [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

/// Static-output-feedback family F(x) = A + B X C with the entries of X
/// arranged row-major into x.  A is N x N, B is N x m, C is p x N; the
/// parameter count is m * p.
MatrixFamily sof_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& C);

}  // namespace specmin
