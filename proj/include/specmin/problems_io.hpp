// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "specmin/problem.hpp"

namespace specmin {

enum class ProblemKind { LinearSof, Affine, Delay };

/// A problem definition as stored on disk: matrices plus metadata, with
/// optional fixed parameter entries that reduce the free dimension.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Affine;
  std::string name;

  // linear-sof payload
  Eigen::MatrixXd A, B, C;

  // affine payload
  Eigen::MatrixXd A0;
  std::vector<Eigen::MatrixXd> directions;

  // delay payload
  struct DelayTermSpec {
    double tau = 0.0;
    Eigen::MatrixXd base;
    std::vector<Eigen::MatrixXd> directions;
  };
  std::vector<DelayTermSpec> delay_terms;

  std::map<int, double> fixed;  // parameter index -> pinned value

  /// Parameter count before fixing entries.
  [[nodiscard]] int raw_params() const;
  /// Parameter count after fixing entries.
  [[nodiscard]] int free_params() const { return raw_params() - static_cast<int>(fixed.size()); }
  [[nodiscard]] bool is_delay() const { return kind == ProblemKind::Delay; }

  /// Family over the free parameters (fixed entries folded into the base).
  [[nodiscard]] MatrixFamily build_family() const;
  [[nodiscard]] DelayFamily build_delay_family() const;
  [[nodiscard]] std::unique_ptr<SpectralProblem> make_problem() const;

  bool operator==(const ProblemSpec& other) const;
};

/// Built-in problems: "fig1-2d" (3x3 rank-one feedback with the third gain
/// fixed at 1.4, two free parameters) and "delay3-feedback" (third-order
/// feedback system with one delay of 5).
ProblemSpec builtin(const std::string& name);

ProblemSpec load(const std::string& path);
void save(const ProblemSpec& spec, const std::string& path);

ProblemSpec parse(std::istream& in, const std::string& origin = "<stream>");
void write(const ProblemSpec& spec, std::ostream& out);

/// Dense evaluation of the spectral abscissa over a 2-D grid (the problem
/// must have exactly two free parameters).  resolution = points per axis;
/// resolution 1 evaluates the range midpoint.
struct GridTable {
  std::vector<double> x1, x2;          // axis coordinates
  Eigen::MatrixXd alpha;               // alpha(i, j) at (x1[i], x2[j])

  void write_tsv(std::ostream& out) const;
  struct Minimum {
    double x1, x2, alpha;
  };
  [[nodiscard]] Minimum minimum() const;
};

GridTable grid_eval(const ProblemSpec& spec, const std::array<double, 2>& range1,
                    const std::array<double, 2>& range2, int resolution);

}  // namespace specmin
