// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specmin/problem.hpp"
#include "specmin/subproblem.hpp"

namespace specmin {

enum class Mode { Slp, Sqp };

enum class SurfaceSelection {
  AllEigenvalues,  // N_k = N
  TopTwoN          // N_k = 2n surfaces with largest real parts
};

enum class StepOutcome { FullStep, LineSearch, Rejected };

struct SolverConfig {
  double gamma1 = 0.1;        // trust-region shrink factor
  double gamma2 = 2.0;        // trust-region growth factor
  double delta_m = 1e-4;      // stopping step norm
  double Delta0 = 1.0;        // initial radius
  int k_max = 20;             // max outer iterations
  int ls_max = 20;            // max backtracking steps
  double eta = 0.5;           // backtracking factor
  int S = 10;                 // random starts
  Mode mode = Mode::Slp;
  SurfaceSelection selection = SurfaceSelection::AllEigenvalues;
  std::size_t memory_cap = 64;  // 0 = unbounded
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stored linearizations at rejected trial points.  Entries are re-activated
/// as extra cuts when the iterate comes back within the trust radius of them.
class MemorySet {
public:
  explicit MemorySet(std::size_t cap = 64) : cap_(cap) {}

  /// Inserts unless the base point duplicates an existing entry; FIFO
  /// eviction beyond the cap.
  void store(const SurfaceCut& cut);

  /// Entries with ||x - base||_inf <= radius.
  [[nodiscard]] std::vector<SurfaceCut> active(const Eigen::VectorXd& x,
                                               double radius) const;

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::vector<SurfaceCut>& entries() const { return entries_; }

private:
  std::vector<SurfaceCut> entries_;
  std::size_t cap_;
};

struct IterateRecord {
  int k = 0;
  Eigen::VectorXd x;
  double alpha = 0.0;
  double radius = 0.0;     // radius used for this iteration's subproblem
  double step_norm = 0.0;  // ||dx||_inf of the subproblem solution
  StepOutcome accepted = StepOutcome::Rejected;
  std::size_t memory_size = 0;
};

struct StepResult {
  Eigen::VectorXd x_next;
  double alpha_next = 0.0;
  double radius_next = 0.0;
  IterateRecord record;
};

/// Builds the subproblem at x: spectrum, surface selection, cut assembly with
/// conjugate-pair deduplication, activation of nearby memory cuts, and the
/// top-surface Hessian in SQP mode.  If the top eigenvalue is defective the
/// point is jittered once (relative 1e-10); a second failure raises
/// DegeneratePointError.
SubproblemInstance assemble_cuts(const SpectralProblem& problem,
                                 const Eigen::VectorXd& x, const SolverConfig& cfg,
                                 const MemorySet& mem, double radius,
                                 std::uint64_t jitter_seed = 0);

/// One outer iteration: subproblem solve, full-step test, memory storage at
/// rejected trial points, descent test, backtracking line search, and
/// trust-region update.
StepResult sqp_step(const SpectralProblem& problem, const Eigen::VectorXd& x_k,
                    double alpha_k, const SolverConfig& cfg, MemorySet& mem,
                    double radius, std::uint64_t jitter_seed = 0);

struct RunResult {
  Eigen::VectorXd x;
  double alpha = 0.0;
  std::vector<IterateRecord> trace;
  bool aborted = false;        // stopped early on a degenerate/subproblem error
  std::string abort_reason;
};

/// Iterates sqp_step until the step norm drops to delta_m with no new memory,
/// or k_max is reached.  Degenerate-point and subproblem errors end the run
/// gracefully with the best iterate so far.
RunResult run_single(const SpectralProblem& problem, const Eigen::VectorXd& x0,
                     const SolverConfig& cfg, std::uint64_t run_seed);
RunResult run_single(const SpectralProblem& problem, const Eigen::VectorXd& x0,
                     const SolverConfig& cfg);

struct StartResult {
  int index = 0;
  Eigen::VectorXd x0;
  Eigen::VectorXd x;
  double alpha = 0.0;
  int iterations = 0;
  double time_sec = 0.0;
  bool ok = false;
  std::string error;
  std::vector<IterateRecord> trace;
};

struct BestResult {
  Eigen::VectorXd x;
  double alpha = 0.0;
  int best_index = -1;
  std::vector<StartResult> per_start;
};

/// S independent runs from standard-normal starts; per-start RNG substreams
/// are derived from (seed, start index) so the outcome does not depend on
/// scheduling.  Failed starts are recorded and excluded; if every start
/// fails, AllStartsFailedError is raised.
BestResult run_multistart(const SpectralProblem& problem, const SolverConfig& cfg);

/// The standard-normal start point used by run_multistart for a given index.
Eigen::VectorXd multistart_point(int n, std::uint64_t seed, int index);

}  // namespace specmin
