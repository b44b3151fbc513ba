// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace specmin {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed arguments: wrong dimensions, non-finite entries, bad ranges.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

/// A numerical routine failed to converge or produced unusable output.
class NumericError : public Error {
public:
  NumericError(const std::string& msg, double matrix_norm, int dim)
      : Error(msg + " (norm=" + std::to_string(matrix_norm) +
              ", dim=" + std::to_string(dim) + ")"),
        matrix_norm(matrix_norm),
        dim(dim) {}
  double matrix_norm;
  int dim;
};

/// Derivative formulas undefined (non-semi-simple eigenvalue, small
/// denominator).  Callers fall back per solver policy.
class DerivativeUndefinedError : public Error {
public:
  using Error::Error;
};

/// LP/QP subproblem could not be solved; the outer loop shrinks the
/// trust region and retries.
class SubproblemFailureError : public Error {
public:
  using Error::Error;
};

/// The current iterate sits on a degenerate point and jitter did not help.
class DegeneratePointError : public Error {
public:
  using Error::Error;
};

/// Delay eigensolver failed (all Newton refinements diverged).
class DelayEigenError : public Error {
public:
  using Error::Error;
};

/// Adaptive discretization hit its degree cap without stabilizing.
class AccuracyError : public Error {
public:
  using Error::Error;
};

/// Problem file could not be parsed.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Every start of a multi-start run failed.
class AllStartsFailedError : public Error {
public:
  using Error::Error;
};

}  // namespace specmin
