#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mmes/mmes.hpp"
#include "mmes/problems.hpp"
#include "mmes/stats.hpp"

#ifndef MMES_GIT_REV
#define MMES_GIT_REV "unknown"
#endif

namespace mmes {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// One batch experiment: a problem, a list of trial seeds, and the
/// optimizer settings shared by all trials.
struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<std::uint64_t> seeds;
  std::uint64_t max_fes = 0;
  double target_f = 1e-8;
  bool restarts = false;
  int trace_every = 1;
  int mixing_strength = 4;
  BaseDistribution base = BaseDistribution::Gaussian;
  double c_sigma = 0.3;
  double d_sigma = 1.0;
  double alpha_z = 0.05;
  bool sigma_uses_new_w = false;
  int max_rotation_dim = 4096;
  std::filesystem::path out_dir;  // per-trial traces land here when set

  void validate() const {
    if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: need at least one seed");
    if (problem.dim < 4) throw std::invalid_argument("ExperimentSpec: dim must be >= 4");
    if (max_fes == 0) throw std::invalid_argument("ExperimentSpec: max_fes must be positive");
  }

  MmesConfig build_config() const {
    MmesConfig cfg = MmesConfig::defaults(static_cast<int>(problem.dim));
    cfg.set_mixing_strength(mixing_strength);
    cfg.base = base;
    cfg.c_sigma = c_sigma;
    cfg.d_sigma = d_sigma;
    cfg.alpha_z = alpha_z;
    cfg.sigma_uses_new_w = sigma_uses_new_w;
    cfg.max_fes = max_fes;
    cfg.target_f = target_f;
    return cfg;
  }
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::uint64_t fes_to_target = 0;  // budget value when the trial failed
  double final_f = 0.0;
  int restarts = 0;
  RunStatus status = RunStatus::BudgetExhausted;
};

/// Worker cap: MMES_THREADS when set, hardware concurrency otherwise.
inline unsigned worker_count(std::size_t jobs) {
  unsigned w = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("MMES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) w = static_cast<unsigned>(v);
  }
  if (w < 1) w = 1;
  return static_cast<unsigned>(std::min<std::size_t>(w, jobs));
}

namespace detail {

inline void write_header_comments(std::ostream& os, const ExperimentSpec& spec,
                                  const MmesConfig& cfg,
                                  std::optional<std::uint64_t> seed) {
  os << "# mmes experiment output\n";
  os << "# revision: " << MMES_GIT_REV << "\n";
  os << "# problem: " << spec.problem.canonical() << "\n";
  if (seed) os << "# seed: " << *seed << "\n";
  else {
    os << "# seeds:";
    for (auto s : spec.seeds) os << " " << s;
    os << "\n";
  }
  os << "# lambda: " << cfg.lambda << ", mu: " << cfg.mu << ", m: " << cfg.m
     << ", l: " << cfg.l << ", T: " << cfg.min_gap << "\n";
  os << "# c_a: " << format_double(cfg.c_a) << ", c_c: " << format_double(cfg.c_c)
     << ", gamma: " << format_double(cfg.gamma) << "\n";
  os << "# c_sigma: " << format_double(cfg.c_sigma) << ", d_sigma: " << format_double(cfg.d_sigma)
     << ", alpha_z: " << format_double(cfg.alpha_z) << ", sigma0: " << format_double(cfg.sigma0)
     << ", sigma_uses_new_w: " << (cfg.sigma_uses_new_w ? 1 : 0) << "\n";
  os << "# base: " << to_string(cfg.base) << ", max_fes: " << cfg.max_fes
     << ", target_f: " << format_double(cfg.target_f)
     << ", restarts: " << (spec.restarts ? "on" : "off")
     << ", trace_every: " << spec.trace_every << "\n";
  os << "# note: rotated problems draw a fresh rotation per trial from rng stream (seed, 1)\n";
  os << "# note: a restart redraws the mean uniformly in [-5,5]^n, resets archive/path/W/sigma,"
        " and doubles lambda and d_sigma\n";
}

}  // namespace detail

inline void write_trace_csv(const std::filesystem::path& path, const ExperimentSpec& spec,
                            const MmesConfig& cfg, std::uint64_t seed, const RunTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open trace file " + path.string());
  detail::write_header_comments(os, spec, cfg, seed);
  os << "generation,fes,best_f,sigma,W\n";
  for (const auto& r : trace.records)
    os << r.gen << "," << r.fes << "," << format_double(r.best_f) << ","
       << format_double(r.sigma) << "," << format_double(r.w) << "\n";
  if (!os) throw std::runtime_error("failed writing trace file " + path.string());
}

inline void write_summary_csv(const std::filesystem::path& path, const ExperimentSpec& spec,
                              const MmesConfig& cfg, const std::vector<TrialResult>& results) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open summary file " + path.string());
  detail::write_header_comments(os, spec, cfg, std::nullopt);
  os << "seed,fes_to_target,final_f,restarts,status\n";
  std::vector<double> fes, finals, restarts;
  for (const auto& r : results) {
    os << r.seed << "," << r.fes_to_target << "," << format_double(r.final_f) << ","
       << r.restarts << "," << to_string(r.status) << "\n";
    fes.push_back(static_cast<double>(r.fes_to_target));
    finals.push_back(r.final_f);
    restarts.push_back(static_cast<double>(r.restarts));
  }
  os << "median," << format_double(median(fes)) << "," << format_double(median(finals)) << ","
     << format_double(median(restarts)) << ",\n";
  if (!os) throw std::runtime_error("failed writing summary file " + path.string());
}

inline TrialResult run_single_trial(const ExperimentSpec& spec, std::uint64_t seed) {
  RngStream rot_rng(seed, 1);
  const Problem prob = spec.problem.instantiate(rot_rng, spec.max_rotation_dim);
  const MmesConfig cfg = spec.build_config();
  RngStream rng(seed, 0);
  const RunTrace trace = spec.restarts
                             ? run_with_restarts(cfg, prob, rng, spec.trace_every)
                             : run(cfg, prob, rng, std::nullopt, spec.trace_every);
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    const auto name = "trace_" + std::string(to_string(spec.problem.kind)) + "_d" +
                      std::to_string(spec.problem.dim) + "_s" + std::to_string(seed) + ".csv";
    write_trace_csv(spec.out_dir / name, spec, cfg, seed, trace);
  }
  TrialResult r;
  r.seed = seed;
  r.fes_to_target = trace.fes_to_target;
  r.final_f = trace.final_f;
  r.restarts = trace.restarts;
  r.status = trace.status;
  return r;
}

/// Runs every seed of the experiment, fanning trials out over a small
/// thread pool (one seed per worker at a time). Results come back in seed
/// order regardless of scheduling, so downstream CSVs are reproducible.
inline std::vector<TrialResult> run_trials(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<TrialResult> results(spec.seeds.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(spec.seeds.size());
  const unsigned workers = worker_count(spec.seeds.size());
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= spec.seeds.size()) return;
        try {
          results[i] = run_single_trial(spec, spec.seeds[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

/// Runs the experiment and writes summary.csv (plus per-trial traces when
/// out_dir is set). Returns the per-trial rows.
inline std::vector<TrialResult> cmd_run(const ExperimentSpec& spec) {
  auto results = run_trials(spec);
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    write_summary_csv(spec.out_dir / "summary.csv", spec, spec.build_config(), results);
  }
  return results;
}

struct SweepCell {
  int l = 0;
  Eigen::Index dim = 0;
  double median_fes = 0.0;
};

/// Median evaluations-to-target per (mixing strength, dimension) cell.
inline std::vector<SweepCell> cmd_sweep_l(ExperimentSpec spec, const std::vector<int>& l_values,
                                          const std::vector<Eigen::Index>& dims) {
  if (l_values.empty()) throw std::invalid_argument("cmd_sweep_l: need at least one l value");
  if (dims.empty()) throw std::invalid_argument("cmd_sweep_l: need at least one dimension");
  const auto out_dir = spec.out_dir;
  spec.out_dir.clear();  // per-trial traces are not useful in a sweep
  std::vector<SweepCell> cells;
  for (const int l : l_values) {
    for (const auto dim : dims) {
      spec.mixing_strength = l;
      spec.problem.dim = dim;
      const auto results = run_trials(spec);
      std::vector<double> fes;
      for (const auto& r : results) fes.push_back(static_cast<double>(r.fes_to_target));
      cells.push_back({l, dim, median(fes)});
    }
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / "sweep_l.csv");
    if (!os) throw std::runtime_error("cannot open sweep_l.csv");
    spec.out_dir = out_dir;
    spec.mixing_strength = l_values.front();
    detail::write_header_comments(os, spec, spec.build_config(), std::nullopt);
    os << "# l_values:";
    for (int l : l_values) os << " " << l;
    os << "\n";
    os << "l,dim,median_fes\n";
    for (const auto& c : cells)
      os << c.l << "," << c.dim << "," << format_double(c.median_fes) << "\n";
  }
  return cells;
}

struct TimingRow {
  Eigen::Index dim = 0;
  double sec_per_eval = 0.0;  // objective time excluded
};

struct TimingResult {
  std::vector<TimingRow> rows;
  std::optional<double> loglog_slope;  // absent with a single dimension
};

/// Wall time per evaluation of the optimizer machinery on the sphere,
/// objective time subtracted out, plus the log-log slope across dimensions.
inline TimingResult measure_timing(const std::vector<Eigen::Index>& dims, int generations = 300,
                                   std::uint64_t seed = 1, int l = 4) {
  if (dims.empty()) throw std::invalid_argument("measure_timing: need at least one dimension");
  using clock = std::chrono::steady_clock;
  TimingResult out;
  for (const auto dim : dims) {
    MmesConfig cfg = MmesConfig::defaults(static_cast<int>(dim));
    cfg.set_mixing_strength(l);
    cfg.max_fes = ~0ull;
    cfg.target_f = -1.0;  // never reached; run a fixed number of generations
    const Problem prob(ObjectiveKind::Sphere, dim);
    RngStream rng(seed, 0);
    EsState state(cfg, rng.uniform_vector(dim, -5.0, 5.0));
    std::int64_t obj_ns = 0;
    const auto timed = [&](const Eigen::VectorXd& x) {
      const auto t0 = clock::now();
      const double f = prob(x);
      obj_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
      return f;
    };
    for (int g = 0; g < 20; ++g) step(state, cfg, timed, rng);  // warm-up
    obj_ns = 0;
    const auto t0 = clock::now();
    for (int g = 0; g < generations; ++g) step(state, cfg, timed, rng);
    const auto total_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
    const double evals = static_cast<double>(generations) * cfg.lambda;
    out.rows.push_back({dim, static_cast<double>(total_ns - obj_ns) * 1e-9 / evals});
  }
  if (out.rows.size() >= 2) {
    std::vector<double> lx, ly;
    for (const auto& r : out.rows) {
      lx.push_back(std::log(static_cast<double>(r.dim)));
      ly.push_back(std::log(r.sec_per_eval));
    }
    out.loglog_slope = linear_fit(lx, ly).slope;
  }
  return out;
}

inline void write_timing_csv(const std::filesystem::path& path, const TimingResult& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open timing file " + path.string());
  os << "# mmes timing (sphere, objective time excluded)\n";
  os << "# revision: " << MMES_GIT_REV << "\n";
  if (t.loglog_slope) os << "# loglog_slope: " << format_double(*t.loglog_slope) << "\n";
  os << "dim,sec_per_eval\n";
  for (const auto& r : t.rows)
    os << r.dim << "," << format_double(r.sec_per_eval) << "\n";
}

}  // namespace mmes
