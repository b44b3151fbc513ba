// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "specmin/derivatives.hpp"

namespace specmin {

/// One trust-region subproblem over (dx, dgamma):
///
///   minimize  dgamma (+ 1/2 dx^T H dx in QP mode)
///   s.t.      dgamma + alpha_k >= cut_i(x_k + dx)   for every cut,
///             ||dx||_inf <= radius.
///
/// Current cuts are anchored at x_k; memory cuts keep their own base points
/// and enter through their affine model evaluated at x_k + dx.
struct SubproblemInstance {
  std::vector<SurfaceCut> current_cuts;
  std::vector<SurfaceCut> memory_cuts;
  double alpha_k = 0.0;
  double radius = 0.0;
  std::optional<Eigen::MatrixXd> hessian;  // absent => LP mode
  Eigen::VectorXd x_k;
};

struct SubproblemSolution {
  Eigen::VectorXd dx;
  double dgamma = 0.0;
  double predicted_value = 0.0;      // subproblem objective at the solution
  std::vector<int> active_set;       // cut indices (current then memory) tight at dx
  double hessian_shift = 0.0;        // sigma added to H for convexity (QP only)
  double kkt_residual = 0.0;         // stationarity residual (QP only)
};

/// Exact LP solve (no Hessian), deterministic: among optimal vertices the
/// lexicographically smallest dx is returned.
SubproblemSolution solve_lp(const SubproblemInstance& inst);

/// Convexified QP solve: H is shifted to H + sigma I with
/// sigma = max(0, eps_H - lambda_min(H)), eps_H = 1e-8, then the convex
/// program is solved to KKT residual <= 1e-8.
SubproblemSolution solve_qp(const SubproblemInstance& inst);

}  // namespace specmin
