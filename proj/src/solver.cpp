// SPDX-License-Identifier: Apache-2.0

#include "specmin/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace specmin {

namespace {

constexpr double kMemoryDupTol = 1e-12;

// splitmix64; used to decorrelate per-start and jitter substreams.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic standard normals via Box-Muller on a seeded mt19937_64.
Eigen::VectorXd standard_normal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd v(n);
  int i = 0;
  while (i < n) {
    const double u1 = std::max(unif(rng), 1e-300);
    const double u2 = unif(rng);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    v(i++) = rad * std::cos(2.0 * M_PI * u2);
    if (i < n) v(i++) = rad * std::sin(2.0 * M_PI * u2);
  }
  return v;
}

// Top-surface cut at a point; throws DerivativeUndefinedError when the top
// eigenvalue is defective there.
SurfaceCut top_cut_at(const SpectralProblem& problem, const Eigen::VectorXd& x,
                      const Spectrum& s) {
  const EigenTriple& top = s.top();
  return make_cut(x, top, problem.gradient(x, top));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(gamma1 > 0.0 && gamma1 < 1.0))
    throw InvalidInputError("SolverConfig: gamma1 must lie in (0,1)");
  if (!(gamma2 > 1.0)) throw InvalidInputError("SolverConfig: gamma2 must exceed 1");
  if (!(delta_m > 0.0)) throw InvalidInputError("SolverConfig: delta_m must be positive");
  if (!(Delta0 > 0.0)) throw InvalidInputError("SolverConfig: Delta0 must be positive");
  if (k_max < 1) throw InvalidInputError("SolverConfig: k_max must be >= 1");
  if (ls_max < 1) throw InvalidInputError("SolverConfig: ls_max must be >= 1");
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidInputError("SolverConfig: eta must lie in (0,1)");
  if (S < 1) throw InvalidInputError("SolverConfig: S must be >= 1");
}

void MemorySet::store(const SurfaceCut& cut) {
  for (const auto& e : entries_)
    if ((e.base_point - cut.base_point).lpNorm<Eigen::Infinity>() <= kMemoryDupTol)
      return;
  entries_.push_back(cut);
  if (cap_ > 0 && entries_.size() > cap_) entries_.erase(entries_.begin());
}

std::vector<SurfaceCut> MemorySet::active(const Eigen::VectorXd& x,
                                          double radius) const {
  std::vector<SurfaceCut> out;
  for (const auto& e : entries_)
    if ((x - e.base_point).lpNorm<Eigen::Infinity>() <= radius) out.push_back(e);
  return out;
}

SubproblemInstance assemble_cuts(const SpectralProblem& problem,
                                 const Eigen::VectorXd& x, const SolverConfig& cfg,
                                 const MemorySet& mem, double radius,
                                 std::uint64_t jitter_seed) {
  if (!x.allFinite()) throw InvalidInputError("assemble_cuts: non-finite point");
  const int n = problem.params();

  Eigen::VectorXd point = x;
  Spectrum spec = problem.spectrum(point);
  Eigen::VectorXcd top_gradient;
  for (int attempt = 0;; ++attempt) {
    try {
      top_gradient = problem.gradient(point, spec.top());
      break;
    } catch (const DerivativeUndefinedError&) {
      if (attempt >= 1)
        throw DegeneratePointError(
            "assemble_cuts: top eigenvalue defective after jitter");
      std::mt19937_64 rng(mix(jitter_seed ^ 0x7f4a7c15ull));
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (int j = 0; j < n; ++j)
        point(j) += 1e-10 * std::max(1.0, std::abs(point(j))) * unif(rng);
      spec = problem.spectrum(point);
    }
  }

  std::size_t count = spec.size();
  if (cfg.selection == SurfaceSelection::TopTwoN)
    count = std::min<std::size_t>(count, std::max(1, 2 * n));

  std::vector<SurfaceCut> cuts;
  cuts.reserve(count);
  cuts.push_back(make_cut(point, spec.top(), top_gradient));
  for (std::size_t i = 1; i < count; ++i) {
    try {
      cuts.push_back(
          make_cut(point, spec.triples[i], problem.gradient(point, spec.triples[i])));
    } catch (const DerivativeUndefinedError&) {
      // Non-top defective surfaces contribute no cut.
    }
  }

  SubproblemInstance inst;
  inst.x_k = point;
  inst.alpha_k = spectral_abscissa(spec);
  inst.radius = radius;
  inst.current_cuts = dedupe_cuts(cuts);
  inst.memory_cuts = mem.active(point, radius);
  if (cfg.mode == Mode::Sqp) {
    try {
      const Eigen::MatrixXcd H = problem.hessian(point, spec.top());
      Eigen::MatrixXd Hr = H.real();
      inst.hessian = 0.5 * (Hr + Hr.transpose());
    } catch (const DerivativeUndefinedError&) {
      // Curvature unavailable at this point; the iteration runs as SLP.
    }
  }
  return inst;
}

StepResult sqp_step(const SpectralProblem& problem, const Eigen::VectorXd& x_k,
                    double alpha_k, const SolverConfig& cfg, MemorySet& mem,
                    double radius, std::uint64_t jitter_seed) {
  SubproblemInstance inst =
      assemble_cuts(problem, x_k, cfg, mem, radius, jitter_seed);
  // A jitter may have displaced the point; from here the instance's point is
  // the current iterate.
  const Eigen::VectorXd& x = inst.x_k;
  const double alpha = inst.alpha_k;
  (void)alpha_k;

  const SubproblemSolution sol =
      inst.hessian.has_value() ? solve_qp(inst) : solve_lp(inst);
  const double step_norm = sol.dx.lpNorm<Eigen::Infinity>();
  const Eigen::VectorXd trial = x + sol.dx;

  StepResult res;
  res.record.x = x;
  res.record.alpha = alpha;
  res.record.radius = radius;
  res.record.step_norm = step_norm;

  const Spectrum spec_trial = problem.spectrum(trial);
  const double alpha_trial = spectral_abscissa(spec_trial);
  if (alpha_trial < alpha) {
    res.x_next = trial;
    res.alpha_next = alpha_trial;
    res.radius_next = cfg.gamma2 * radius;
    res.record.accepted = StepOutcome::FullStep;
    res.record.x = trial;
    res.record.alpha = alpha_trial;
    res.record.memory_size = mem.size();
    return res;
  }

  // Rejected trial: store its top-surface linearization.  If the trial
  // point's top eigenvalue is defective the gradient does not exist; no
  // entry is stored and the radius just shrinks.
  bool trial_degenerate = false;
  if (alpha_trial > alpha) {
    try {
      mem.store(top_cut_at(problem, trial, spec_trial));
    } catch (const DerivativeUndefinedError&) {
      trial_degenerate = true;
    }
  }

  const Eigen::VectorXd top_grad = inst.current_cuts.front().gradient;
  const bool descent = top_grad.dot(sol.dx) < 0.0;

  if (descent && !trial_degenerate) {
    double t = 1.0;
    for (int ls = 1; ls <= cfg.ls_max; ++ls) {
      t *= cfg.eta;
      const Eigen::VectorXd probe = x + t * sol.dx;
      const double alpha_probe = problem.alpha(probe);
      if (alpha_probe < alpha) {
        res.x_next = probe;
        res.alpha_next = alpha_probe;
        res.radius_next = t * step_norm;
        res.record.accepted = StepOutcome::LineSearch;
        res.record.x = probe;
        res.record.alpha = alpha_probe;
        res.record.memory_size = mem.size();
        return res;
      }
    }
  }

  res.x_next = x;
  res.alpha_next = alpha;
  res.radius_next = cfg.gamma1 * radius;
  res.record.accepted = StepOutcome::Rejected;
  res.record.memory_size = mem.size();
  return res;
}

RunResult run_single(const SpectralProblem& problem, const Eigen::VectorXd& x0,
                     const SolverConfig& cfg, std::uint64_t run_seed) {
  cfg.validate();
  if (x0.size() != problem.params())
    throw InvalidInputError("run_single: start point dimension mismatch");

  RunResult out;
  out.x = x0;
  out.alpha = problem.alpha(x0);

  MemorySet mem(cfg.memory_cap);
  double radius = cfg.Delta0;
  Eigen::VectorXd x = x0;
  double alpha = out.alpha;

  for (int k = 1; k <= cfg.k_max; ++k) {
    const std::size_t mem_before = mem.size();
    StepResult step;
    try {
      step = sqp_step(problem, x, alpha, cfg, mem, radius, mix(run_seed) + k);
    } catch (const DegeneratePointError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    } catch (const SubproblemFailureError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    } catch (const DelayEigenError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    } catch (const AccuracyError& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      break;
    }
    step.record.k = k;
    out.trace.push_back(step.record);
    x = step.x_next;
    alpha = step.alpha_next;
    radius = step.radius_next;
    if (step.record.step_norm <= cfg.delta_m && mem.size() == mem_before) break;
  }

  out.x = x;
  out.alpha = alpha;
  return out;
}

RunResult run_single(const SpectralProblem& problem, const Eigen::VectorXd& x0,
                     const SolverConfig& cfg) {
  return run_single(problem, x0, cfg, cfg.seed);
}

Eigen::VectorXd multistart_point(int n, std::uint64_t seed, int index) {
  return standard_normal(n, mix(seed ^ mix(static_cast<std::uint64_t>(index) + 1)));
}

BestResult run_multistart(const SpectralProblem& problem, const SolverConfig& cfg) {
  cfg.validate();
  const int n = problem.params();

  BestResult best;
  best.per_start.reserve(cfg.S);
  for (int s = 0; s < cfg.S; ++s) {
    StartResult sr;
    sr.index = s;
    sr.x0 = multistart_point(n, cfg.seed, s);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunResult run = run_single(problem, sr.x0, cfg,
                                       mix(cfg.seed ^ mix(static_cast<std::uint64_t>(s) + 0x51ull)));
      sr.x = run.x;
      sr.alpha = run.alpha;
      sr.iterations = static_cast<int>(run.trace.size());
      sr.trace = run.trace;
      sr.ok = true;
    } catch (const std::exception& e) {
      sr.ok = false;
      sr.error = e.what();
    }
    sr.time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    best.per_start.push_back(std::move(sr));
  }

  for (const auto& sr : best.per_start) {
    if (!sr.ok) continue;
    if (best.best_index < 0 || sr.alpha < best.alpha) {
      best.best_index = sr.index;
      best.alpha = sr.alpha;
      best.x = sr.x;
    }
  }
  if (best.best_index < 0)
    throw AllStartsFailedError("run_multistart: every start failed");
  return best;
}

}  // namespace specmin
