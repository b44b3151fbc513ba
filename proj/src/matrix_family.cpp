// SPDX-License-Identifier: Apache-2.0

#include "specmin/matrix_family.hpp"

namespace specmin {

MatrixFamily::MatrixFamily(Eigen::MatrixXd base_in, std::vector<Eigen::MatrixXd> dirs)
    : base(std::move(base_in)), directions(std::move(dirs)) {
  if (base.rows() != base.cols())
    throw InvalidInputError("MatrixFamily: base matrix must be square");
  for (const auto& d : directions)
    if (d.rows() != base.rows() || d.cols() != base.cols())
      throw InvalidInputError("MatrixFamily: direction dimension mismatch");
}

Eigen::MatrixXd MatrixFamily::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != params())
    throw InvalidInputError("MatrixFamily::evaluate: wrong parameter count");
  Eigen::MatrixXd F = base;
  for (int k = 0; k < params(); ++k) F += x(k) * directions[k];
  return F;
}

MatrixFamily sof_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& C) {
  if (A.rows() != A.cols()) throw InvalidInputError("sof_family: A must be square");
  if (B.rows() != A.rows())
    throw InvalidInputError("sof_family: B row count must match A");
  if (C.cols() != A.cols())
    throw InvalidInputError("sof_family: C column count must match A");
  const int m = static_cast<int>(B.cols());
  const int p = static_cast<int>(C.rows());
  std::vector<Eigen::MatrixXd> dirs;
  dirs.reserve(static_cast<std::size_t>(m) * p);
  // Entry (r, s) of the gain matrix X, row-major: d F / d X_rs = B e_r e_s^T C.
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < p; ++s) dirs.push_back(B.col(r) * C.row(s));
  return MatrixFamily(A, std::move(dirs));
}

}  // namespace specmin
