// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace specmin::finite_diff {

/// Central-difference gradient of a scalar function.
inline Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    const double fp = f(xp);
    xp(k) = x(k) - h;
    const double fm = f(xp);
    xp(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference gradient of a complex-valued function of real x.
inline Eigen::VectorXcd gradient_complex(
    const std::function<std::complex<double>(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXcd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    const std::complex<double> fp = f(xp);
    xp(k) = x(k) - h;
    const std::complex<double> fm = f(xp);
    xp(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector-valued function (rows follow f).
inline Eigen::MatrixXd jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd J;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    const Eigen::VectorXd fp = f(xp);
    xp(k) = x(k) - h;
    const Eigen::VectorXd fm = f(xp);
    xp(k) = x(k);
    if (J.size() == 0) J.resize(fp.size(), x.size());
    J.col(k) = (fp - fm) / (2.0 * h);
  }
  return J;
}

}  // namespace specmin::finite_diff
