// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>

#include "specmin/problems_io.hpp"
#include "specmin/report.hpp"

namespace {

struct ProblemArgs {
  std::string file;
  std::string builtin_name;
};

void add_problem_flags(CLI::App* cmd, ProblemArgs* args) {
  auto* file_opt = cmd->add_option("--problem", args->file, "Problem file to load");
  auto* builtin_opt =
      cmd->add_option("--builtin", args->builtin_name,
                      "Built-in problem (fig1-2d, delay3-feedback)");
  file_opt->excludes(builtin_opt);
}

specmin::ProblemSpec resolve_problem(const ProblemArgs& args) {
  if (!args.builtin_name.empty()) return specmin::builtin(args.builtin_name);
  if (!args.file.empty()) return specmin::load(args.file);
  throw CLI::ValidationError("either --problem or --builtin is required");
}

struct ConfigArgs {
  std::string mode = "slp";
  int starts = 10;
  std::uint64_t seed = 0;
  double tol = 1e-4;
  int max_iters = 20;
  double delta0 = 1.0;
  std::string selection = "all";
  std::size_t memory_cap = 64;
};

void add_config_flags(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--mode", args->mode, "slp or sqp")
      ->check(CLI::IsMember({"slp", "sqp"}));
  cmd->add_option("--starts", args->starts, "Random starts per run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args->seed, "RNG seed");
  cmd->add_option("--tol", args->tol, "Stopping step norm")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", args->max_iters, "Max outer iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--delta0", args->delta0, "Initial trust radius")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--selection", args->selection, "Surfaces per iteration: all or top2n")
      ->check(CLI::IsMember({"all", "top2n"}));
  cmd->add_option("--memory-cap", args->memory_cap, "Memory entries kept (0 = unbounded)");
}

specmin::SolverConfig make_config(const ConfigArgs& args) {
  specmin::SolverConfig cfg;
  cfg.mode = args.mode == "sqp" ? specmin::Mode::Sqp : specmin::Mode::Slp;
  cfg.S = args.starts;
  cfg.seed = args.seed;
  cfg.delta_m = args.tol;
  cfg.k_max = args.max_iters;
  cfg.Delta0 = args.delta0;
  cfg.selection = args.selection == "top2n"
                      ? specmin::SurfaceSelection::TopTwoN
                      : specmin::SurfaceSelection::AllEigenvalues;
  cfg.memory_cap = args.memory_cap;
  return cfg;
}

void write_output(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral abscissa minimization (SLP/SQP with trust region and memory)"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Multi-start minimization run");
  ProblemArgs solve_problem;
  ConfigArgs solve_config;
  std::string solve_out, trace_out;
  add_problem_flags(solve_cmd, &solve_problem);
  add_config_flags(solve_cmd, &solve_config);
  solve_cmd->add_option("--out", solve_out, "Report JSON path (default stdout)");
  solve_cmd->add_option("--trace", trace_out, "TSV trace of the best start");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Repeated-trial statistics");
  ProblemArgs bench_problem;
  ConfigArgs bench_config;
  std::string bench_out;
  int trials = 20;
  int threads = 1;
  add_problem_flags(bench_cmd, &bench_problem);
  add_config_flags(bench_cmd, &bench_config);
  bench_cmd->add_option("--trials", trials, "Independent multi-start batches")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--threads", threads, "Worker threads for trials")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_out, "Stats JSON path (default stdout)");

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "2-D spectral abscissa grid (TSV)");
  ProblemArgs grid_problem;
  std::vector<double> range{-3.0, 3.0, -3.0, 3.0};
  int res = 601;
  std::string grid_out;
  add_problem_flags(grid_cmd, &grid_problem);
  grid_cmd->add_option("--range", range, "x1 min, x1 max, x2 min, x2 max")
      ->expected(4);
  grid_cmd->add_option("--res", res, "Points per axis")->check(CLI::PositiveNumber);
  grid_cmd->add_option("--out", grid_out, "TSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
  }

  try {
    if (*solve_cmd) {
      const specmin::ProblemSpec spec = resolve_problem(solve_problem);
      const specmin::SolverConfig cfg = make_config(solve_config);
      const auto problem = spec.make_problem();
      const auto t0 = std::chrono::steady_clock::now();
      const specmin::BestResult best = specmin::run_multistart(*problem, cfg);
      const double total =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_output(specmin::solve_report(spec.name, cfg, best, total), solve_out);
      if (!trace_out.empty()) {
        std::ofstream tr(trace_out);
        if (!tr) throw std::runtime_error("cannot open trace file: " + trace_out);
        specmin::write_trace_tsv(best.per_start[best.best_index].trace, tr);
      }
    } else if (*bench_cmd) {
      const specmin::ProblemSpec spec = resolve_problem(bench_problem);
      const specmin::SolverConfig cfg = make_config(bench_config);
      const auto problem = spec.make_problem();
      const specmin::BenchResult result =
          specmin::bench_run(*problem, cfg, trials, cfg.seed, threads);
      write_output(specmin::bench_report(spec.name, cfg, trials, result), bench_out);
    } else if (*grid_cmd) {
      const specmin::ProblemSpec spec = resolve_problem(grid_problem);
      const specmin::GridTable table = specmin::grid_eval(
          spec, {range[0], range[1]}, {range[2], range[3]}, res);
      if (grid_out.empty() || grid_out == "-") {
        table.write_tsv(std::cout);
      } else {
        std::ofstream out(grid_out);
        if (!out) throw std::runtime_error("cannot open output file: " + grid_out);
        table.write_tsv(out);
      }
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const specmin::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const specmin::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
