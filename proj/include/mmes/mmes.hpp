#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmes/archive.hpp"
#include "mmes/fms.hpp"
#include "mmes/pta.hpp"
#include "mmes/rng.hpp"

namespace mmes {

/// Full optimizer configuration. `defaults(n)` fills every field from the
/// standard parameter table:
///   lambda = 4 + floor(3 ln n),  mu = floor(lambda/2),  m = 2 ceil(sqrt(n)),
///   c_a = 4/n,  c_c = 0.4/sqrt(n),  T = ceil(1/c_c),  gamma = 1-(1-c_a)^m,
///   c_sigma = 0.3,  d_sigma = 1,  alpha_z = 0.05,  l = 4.
struct MmesConfig {
  int n = 0;
  int lambda = 0;
  int mu = 0;
  int m = 0;
  int min_gap = 0;  // T, the timestamp distance threshold
  int l = 4;
  double c_a = 0.0;
  double c_c = 0.0;
  double gamma = 0.0;
  double c_sigma = 0.3;
  double d_sigma = 1.0;
  double alpha_z = 0.05;
  double sigma0 = 3.0;
  double target_f = 1e-8;
  std::uint64_t max_fes = 0;
  BaseDistribution base = BaseDistribution::Gaussian;
  /// Literal pseudocode updates W first and feeds sigma the pre-update W;
  /// set to true to feed sigma the freshly updated W instead.
  bool sigma_uses_new_w = false;
  RecombinationWeights weights{1};

  static MmesConfig defaults(int n) {
    if (n < 4) throw std::invalid_argument("MmesConfig::defaults: n must be >= 4");
    MmesConfig c;
    c.n = n;
    c.lambda = 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
    c.m = 2 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    c.c_a = 4.0 / n;
    c.c_c = 0.4 / std::sqrt(static_cast<double>(n));
    c.min_gap = static_cast<int>(std::ceil(1.0 / c.c_c));
    c.max_fes = static_cast<std::uint64_t>(n) * 100000ull;
    c.set_lambda(c.lambda);
    c.set_mixing_strength(c.l);
    return c;
  }

  /// Sets lambda and the dependent mu and recombination weights.
  void set_lambda(int lambda_in) {
    if (lambda_in < 2) throw std::invalid_argument("MmesConfig: lambda must be >= 2");
    lambda = lambda_in;
    mu = lambda / 2;
    weights = RecombinationWeights(mu);
  }

  void set_mixing_strength(int l_in) {
    l = l_in;
    gamma = MixtureParams::make(c_a, m, l).gamma;
  }

  MixtureParams mixture_params() const { return MixtureParams::make(c_a, m, l); }
};

enum class RunStatus { TargetReached, BudgetExhausted, Stagnated };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::TargetReached: return "target_reached";
    case RunStatus::BudgetExhausted: return "budget_exhausted";
    case RunStatus::Stagnated: return "stagnated";
  }
  return "?";
}

struct TraceRecord {
  std::int64_t gen = 0;
  std::uint64_t fes = 0;
  double best_f = 0.0;  // best-so-far, nonincreasing along the trace
  double sigma = 0.0;
  double w = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::BudgetExhausted;
  double final_f = std::numeric_limits<double>::infinity();
  std::uint64_t fes = 0;
  /// Evaluations consumed when the target was first crossed; equals the
  /// budget when the run did not converge.
  std::uint64_t fes_to_target = 0;
  int restarts = 0;
  std::int64_t generations = 0;
};

/// Per-run mutable state of the evolution strategy.
struct EsState {
  Eigen::VectorXd mean;
  double sigma = 3.0;
  Eigen::VectorXd path;
  PtaState pta;
  DirectionArchive archive;
  std::int64_t gen = 0;
  std::uint64_t fes = 0;
  std::vector<double> prev_sorted_f;  // empty before the first generation
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  std::uint64_t fes_at_target = 0;  // 0 until target_f is first crossed

  EsState(const MmesConfig& cfg, Eigen::VectorXd mean0)
      : mean(std::move(mean0)),
        sigma(cfg.sigma0),
        path(Eigen::VectorXd::Zero(cfg.n)),
        pta{0.0, cfg.c_sigma, cfg.d_sigma, cfg.alpha_z},
        archive(cfg.n, cfg.m, cfg.min_gap) {
    if (mean.size() != cfg.n) throw std::invalid_argument("EsState: mean dimension mismatch");
  }
};

struct GenerationSummary {
  double gen_best_f = 0.0;
  double best_f = 0.0;
  double sigma = 0.0;
  double w = 0.0;
};

/// One generation: sample lambda offspring x_i = mean + sigma z_i with z_i
/// from the mixture sampler, evaluate and rank them, recombine the mean,
/// cumulate the evolution path, update the archive, then apply the
/// paired-test sigma rule (skipped in the very first generation, which has
/// no predecessor population). The objective is any callable
/// double(const Eigen::VectorXd&); a Problem works directly.
template <class Objective>
GenerationSummary step(EsState& state, const MmesConfig& cfg, const Objective& objective,
                       RngStream& rng) {
  const auto params = cfg.mixture_params();
  const int lambda = cfg.lambda;

  thread_local Eigen::MatrixXd z;
  thread_local Eigen::VectorXd x;
  z.resize(cfg.n, lambda);
  x.resize(cfg.n);

  std::vector<double> f(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) {
    sample_mutation(params, state.archive, rng, cfg.base, z.col(i));
    x = state.mean + state.sigma * z.col(i);
    const double fi = objective(x);
    ++state.fes;
    if (!std::isfinite(fi))
      throw std::runtime_error("objective returned a non-finite value (" +
                               std::to_string(fi) + ") at generation " +
                               std::to_string(state.gen));
    f[static_cast<std::size_t>(i)] = fi;
    if (fi < state.best_f) {
      state.best_f = fi;
      state.best_x = state.mean + state.sigma * z.col(i);
      if (state.fes_at_target == 0 && fi < cfg.target_f) state.fes_at_target = state.fes;
    }
  }

  // rank ascending; ties keep sampling order
  std::vector<int> order(static_cast<std::size_t>(lambda));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)]; });

  Eigen::VectorXd wz = Eigen::VectorXd::Zero(cfg.n);
  for (int j = 0; j < cfg.mu; ++j)
    wz.noalias() += cfg.weights.omega[j] * z.col(order[static_cast<std::size_t>(j)]);

  // (mean' - mean)/sigma == wz, so the path cumulates wz directly
  state.path = (1.0 - cfg.c_c) * state.path +
               std::sqrt(cfg.c_c * (2.0 - cfg.c_c) * cfg.weights.mu_eff) * wz;
  state.mean.noalias() += state.sigma * wz;

  state.archive.update(state.path, state.gen);

  std::vector<double> sorted_f(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i)
    sorted_f[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

  if (!state.prev_sorted_f.empty()) {
    const double L = success_metric(state.prev_sorted_f, sorted_f, cfg.weights);
    if (cfg.sigma_uses_new_w) {
      update_w(state.pta, L, cfg.weights);
      state.sigma = update_sigma(state.sigma, state.pta);
    } else {
      const PtaState before = state.pta;
      update_w(state.pta, L, cfg.weights);
      state.sigma = update_sigma(state.sigma, before);
    }
    if (!(state.sigma > 0.0) || !std::isfinite(state.sigma))
      throw std::runtime_error("mutation strength left (0, inf) at generation " +
                               std::to_string(state.gen));
  }
  state.prev_sorted_f = std::move(sorted_f);
  ++state.gen;

  const double gen_best = f[static_cast<std::size_t>(order[0])];
  return {gen_best, state.best_f, state.sigma, state.pta.w};
}

namespace detail {

struct RunCarry {
  std::uint64_t fes = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::int64_t gen_offset = 0;
};

template <class Objective>
RunTrace run_impl(const MmesConfig& cfg, const Objective& objective, RngStream& rng,
                  std::optional<Eigen::VectorXd> init_mean, int trace_every,
                  int stagnation_window, const RunCarry& carry) {
  if (cfg.max_fes == 0) throw std::invalid_argument("run: budget must be positive");
  if (trace_every < 1) throw std::invalid_argument("run: trace_every must be >= 1");

  EsState state(cfg, init_mean ? std::move(*init_mean) : rng.uniform_vector(cfg.n, -5.0, 5.0));
  state.fes = carry.fes;
  state.best_f = carry.best_f;

  RunTrace trace;
  std::deque<double> window;  // best-so-far at the end of recent generations
  const double stagnation_eps = 1e-8;

  auto record = [&](const GenerationSummary& s) {
    trace.records.push_back({carry.gen_offset + state.gen, state.fes, s.best_f, s.sigma, s.w});
  };

  while (true) {
    if (state.best_f < cfg.target_f) {
      trace.status = RunStatus::TargetReached;
      break;
    }
    if (state.fes >= cfg.max_fes) {
      trace.status = RunStatus::BudgetExhausted;
      break;
    }
    const GenerationSummary s = step(state, cfg, objective, rng);
    if (state.gen % trace_every == 0 || state.best_f < cfg.target_f ||
        state.fes >= cfg.max_fes)
      record(s);

    if (stagnation_window > 0) {
      window.push_back(state.best_f);
      if (static_cast<int>(window.size()) > stagnation_window) {
        const double improvement = window.front() - window.back();
        window.pop_front();
        if (improvement < stagnation_eps && state.best_f >= cfg.target_f) {
          trace.status = RunStatus::Stagnated;
          break;
        }
      }
    }
  }

  trace.final_f = state.best_f;
  trace.fes = state.fes;
  trace.fes_to_target = state.fes_at_target != 0 ? state.fes_at_target : cfg.max_fes;
  trace.generations = state.gen;
  return trace;
}

}  // namespace detail

/// Runs until the target objective value is crossed or the budget is spent.
/// The default initial mean is uniform in [-5,5]^n (drawn from `rng` before
/// any generation), the initial mutation strength is sigma0. A positive
/// `stagnation_window` additionally stops the run once the best-so-far
/// value improves by less than 1e-8 across that many consecutive
/// generations.
template <class Objective>
RunTrace run(const MmesConfig& cfg, const Objective& objective, RngStream& rng,
             std::optional<Eigen::VectorXd> init_mean = std::nullopt,
             int trace_every = 1, int stagnation_window = 0) {
  return detail::run_impl(cfg, objective, rng, std::move(init_mean), trace_every,
                          stagnation_window, {});
}

/// Restarting driver: whenever a segment stagnates (no 1e-8 improvement
/// over the last n generations), the population size and the damping factor
/// both double and the optimizer state is rebuilt from scratch with a fresh
/// uniform mean. The budget, the global best, and the trace span all
/// restarts.
template <class Objective>
RunTrace run_with_restarts(const MmesConfig& cfg0, const Objective& objective, RngStream& rng,
                           int trace_every = 1) {
  MmesConfig cfg = cfg0;
  RunTrace total;
  detail::RunCarry carry;
  while (true) {
    RunTrace seg = detail::run_impl(cfg, objective, rng, std::nullopt, trace_every, cfg.n, carry);
    total.records.insert(total.records.end(), seg.records.begin(), seg.records.end());
    total.status = seg.status;
    total.final_f = seg.final_f;
    total.fes = seg.fes;
    total.generations = carry.gen_offset + seg.generations;
    if (seg.fes_to_target != cfg.max_fes && total.fes_to_target == 0)
      total.fes_to_target = seg.fes_to_target;
    if (seg.status != RunStatus::Stagnated) break;
    carry.fes = seg.fes;
    carry.best_f = seg.final_f;
    carry.gen_offset = total.generations;
    ++total.restarts;
    cfg.set_lambda(2 * cfg.lambda);
    cfg.d_sigma *= 2.0;
  }
  if (total.fes_to_target == 0) total.fes_to_target = cfg.max_fes;
  return total;
}

}  // namespace mmes
