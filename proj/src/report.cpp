// SPDX-License-Identifier: Apache-2.0

#include "specmin/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <ostream>

namespace specmin {

SampleStats compute_stats(std::vector<double> values) {
  SampleStats st;
  if (values.empty()) return st;
  const double n = static_cast<double>(values.size());
  st.mean = 0.0;
  for (double v : values) st.mean += v;
  st.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.stdev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(values.begin(), values.end());
  st.min = values.front();
  st.max = values.back();
  const std::size_t mid = values.size() / 2;
  st.median = values.size() % 2 == 1 ? values[mid]
                                     : 0.5 * (values[mid - 1] + values[mid]);
  return st;
}

namespace {

nlohmann::json stats_to_json(const SampleStats& st) {
  return {{"mean", st.mean},
          {"stdev", st.stdev},
          {"median", st.median},
          {"min", st.min},
          {"max", st.max}};
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

const char* outcome_name(StepOutcome o) {
  switch (o) {
    case StepOutcome::FullStep: return "full-step";
    case StepOutcome::LineSearch: return "line-search";
    case StepOutcome::Rejected: return "rejected";
  }
  return "?";
}

}  // namespace

nlohmann::json config_to_json(const SolverConfig& cfg) {
  return {{"gamma1", cfg.gamma1},
          {"gamma2", cfg.gamma2},
          {"delta_m", cfg.delta_m},
          {"Delta0", cfg.Delta0},
          {"k_max", cfg.k_max},
          {"ls_max", cfg.ls_max},
          {"eta", cfg.eta},
          {"starts", cfg.S},
          {"mode", cfg.mode == Mode::Slp ? "slp" : "sqp"},
          {"selection",
           cfg.selection == SurfaceSelection::AllEigenvalues ? "all" : "top2n"},
          {"memory_cap", cfg.memory_cap},
          {"seed", cfg.seed}};
}

nlohmann::json start_to_json(const StartResult& s) {
  nlohmann::json j = {{"index", s.index},
                      {"ok", s.ok},
                      {"x0", vector_to_json(s.x0)},
                      {"time_sec", s.time_sec}};
  if (s.ok) {
    j["x"] = vector_to_json(s.x);
    j["alpha"] = s.alpha;
    j["iterations"] = s.iterations;
  } else {
    j["error"] = s.error;
  }
  return j;
}

nlohmann::json solve_report(const std::string& problem_name, const SolverConfig& cfg,
                            const BestResult& best, double total_time_sec) {
  nlohmann::json starts = nlohmann::json::array();
  for (const auto& s : best.per_start) starts.push_back(start_to_json(s));
  return {{"problem", problem_name},
          {"mode", cfg.mode == Mode::Slp ? "slp" : "sqp"},
          {"config", config_to_json(cfg)},
          {"starts", starts},
          {"best",
           {{"start_index", best.best_index},
            {"x", vector_to_json(best.x)},
            {"alpha", best.alpha}}},
          {"total_time_sec", total_time_sec}};
}

BenchResult bench_run(const SpectralProblem& problem, const SolverConfig& cfg,
                      int trials, std::uint64_t base_seed, int threads) {
  if (trials < 1) throw InvalidInputError("bench_run: trials must be >= 1");

  auto one_trial = [&](int t) {
    SolverConfig trial_cfg = cfg;
    trial_cfg.seed = base_seed + static_cast<std::uint64_t>(t);
    TrialResult tr;
    tr.seed = trial_cfg.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const BestResult best = run_multistart(problem, trial_cfg);
    tr.time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    tr.alpha = best.alpha;
    tr.best_index = best.best_index;
    return tr;
  };

  BenchResult out;
  out.trials.resize(trials);
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) out.trials[t] = one_trial(t);
  } else {
    std::vector<std::future<TrialResult>> futures;
    futures.reserve(trials);
    for (int t = 0; t < trials; ++t)
      futures.push_back(std::async(std::launch::async, one_trial, t));
    for (int t = 0; t < trials; ++t) out.trials[t] = futures[t].get();
  }

  std::vector<double> alphas, times;
  for (const auto& tr : out.trials) {
    alphas.push_back(tr.alpha);
    times.push_back(tr.time_sec);
  }
  out.alpha_stats = compute_stats(alphas);
  out.time_stats = compute_stats(times);
  return out;
}

nlohmann::json bench_report(const std::string& problem_name, const SolverConfig& cfg,
                            int trials, const BenchResult& result) {
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& tr : result.trials)
    jt.push_back({{"seed", tr.seed},
                  {"alpha", tr.alpha},
                  {"best_index", tr.best_index},
                  {"time_sec", tr.time_sec}});
  return {{"problem", problem_name},
          {"mode", cfg.mode == Mode::Slp ? "slp" : "sqp"},
          {"config", config_to_json(cfg)},
          {"trials", trials},
          {"per_trial", jt},
          {"stats",
           {{"alpha", stats_to_json(result.alpha_stats)},
            {"time_sec", stats_to_json(result.time_stats)}}}};
}

void write_trace_tsv(const std::vector<IterateRecord>& trace, std::ostream& out) {
  out << "k\talpha\tdelta\tstep_norm\taccepted\tmemory\n";
  for (const auto& r : trace)
    out << r.k << '\t' << r.alpha << '\t' << r.radius << '\t' << r.step_norm << '\t'
        << outcome_name(r.accepted) << '\t' << r.memory_size << '\n';
}

}  // namespace specmin
