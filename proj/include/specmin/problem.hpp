// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "specmin/delay.hpp"
#include "specmin/derivatives.hpp"

namespace specmin {

/// Uniform view of a parameterized eigenvalue problem for the outer solver:
/// the ordered spectrum at a point plus per-surface first and second
/// derivatives.
class SpectralProblem {
public:
  virtual ~SpectralProblem() = default;

  [[nodiscard]] virtual int params() const = 0;
  [[nodiscard]] virtual Spectrum spectrum(const Eigen::VectorXd& x) const = 0;
  [[nodiscard]] virtual Eigen::VectorXcd gradient(const Eigen::VectorXd& x,
                                                  const EigenTriple& t) const = 0;
  [[nodiscard]] virtual Eigen::MatrixXcd hessian(const Eigen::VectorXd& x,
                                                 const EigenTriple& t) const = 0;

  [[nodiscard]] double alpha(const Eigen::VectorXd& x) const {
    return spectral_abscissa(spectrum(x));
  }
};

/// Linear (affine) matrix family.
class LinearSpectralProblem final : public SpectralProblem {
public:
  explicit LinearSpectralProblem(MatrixFamily fam) : fam_(std::move(fam)) {}

  [[nodiscard]] int params() const override { return fam_.params(); }
  [[nodiscard]] Spectrum spectrum(const Eigen::VectorXd& x) const override {
    return eig_full(fam_.evaluate(x));
  }
  [[nodiscard]] Eigen::VectorXcd gradient(const Eigen::VectorXd& x,
                                          const EigenTriple& t) const override {
    (void)x;
    return eig_gradient(fam_, t);
  }
  [[nodiscard]] Eigen::MatrixXcd hessian(const Eigen::VectorXd& x,
                                         const EigenTriple& t) const override {
    return eig_hessian(fam_, t, fam_.evaluate(x));
  }

  [[nodiscard]] const MatrixFamily& family() const { return fam_; }

private:
  MatrixFamily fam_;
};

/// Time-delay family; the spectrum call returns the eigenvalues right of the
/// shifting half-plane starting at -1/tau_max.
class DelaySpectralProblem final : public SpectralProblem {
public:
  explicit DelaySpectralProblem(DelayFamily fam) : fam_(std::move(fam)) {}

  [[nodiscard]] int params() const override { return fam_.params(); }
  [[nodiscard]] Spectrum spectrum(const Eigen::VectorXd& x) const override {
    return rightmost_eigs(fam_, x).to_spectrum(fam_.dim());
  }
  [[nodiscard]] Eigen::VectorXcd gradient(const Eigen::VectorXd& x,
                                          const EigenTriple& t) const override {
    return delay_gradient(fam_, x, t);
  }
  [[nodiscard]] Eigen::MatrixXcd hessian(const Eigen::VectorXd& x,
                                         const EigenTriple& t) const override {
    return delay_hessian(fam_, x, t);
  }

  [[nodiscard]] const DelayFamily& family() const { return fam_; }

private:
  DelayFamily fam_;
};

}  // namespace specmin
