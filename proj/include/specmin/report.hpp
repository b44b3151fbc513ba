// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "specmin/solver.hpp"

namespace specmin {

/// Summary statistics over a sample (final objectives, wall times).
struct SampleStats {
  double mean = 0.0;
  double stdev = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

SampleStats compute_stats(std::vector<double> values);

nlohmann::json config_to_json(const SolverConfig& cfg);
nlohmann::json start_to_json(const StartResult& s);

/// Report for one multi-start solve.
nlohmann::json solve_report(const std::string& problem_name, const SolverConfig& cfg,
                            const BestResult& best, double total_time_sec);

struct TrialResult {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double time_sec = 0.0;
  int best_index = -1;
};

struct BenchResult {
  std::vector<TrialResult> trials;
  SampleStats alpha_stats;
  SampleStats time_stats;
};

/// T independent multi-start batches with fresh seeds seed, seed+1, ...
/// mirroring the repeated-trial protocol used for the benchmark tables.
BenchResult bench_run(const SpectralProblem& problem, const SolverConfig& cfg,
                      int trials, std::uint64_t base_seed, int threads = 1);

nlohmann::json bench_report(const std::string& problem_name, const SolverConfig& cfg,
                            int trials, const BenchResult& result);

/// TSV convergence trace: k, alpha, Delta, step norm, outcome, |M|.
void write_trace_tsv(const std::vector<IterateRecord>& trace, std::ostream& out);

}  // namespace specmin
