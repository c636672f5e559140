#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "mmes/rng.hpp"

namespace mmes {

/// Log-rank recombination weights
/// omega_i = (ln(mu+0.5) - ln i) / sum_j (ln(mu+0.5) - ln j), i = 1..mu.
/// Strictly decreasing, positive, summing to one; mu_eff = 1/sum omega_i^2.
struct RecombinationWeights {
  int mu = 0;
  Eigen::VectorXd omega;
  double mu_eff = 0.0;

  explicit RecombinationWeights(int mu_in) : mu(mu_in), omega(mu_in) {
    if (mu < 1) throw std::invalid_argument("RecombinationWeights: mu must be >= 1");
    const double top = std::log(mu + 0.5);
    double sum = 0.0;
    for (int i = 1; i <= mu; ++i) {
      omega[i - 1] = top - std::log(static_cast<double>(i));
      sum += omega[i - 1];
    }
    omega /= sum;
    mu_eff = 1.0 / omega.squaredNorm();
  }
};

/// Mutation-strength adaptation state: the smoothed success statistic W and
/// the z-test parameters.
struct PtaState {
  double w = 0.0;
  double c_sigma = 0.3;
  double d_sigma = 1.0;
  double alpha_z = 0.05;
};

/// Weighted fraction of rank-paired objective improvements between two
/// consecutive generations, L = sum_i omega_i [prev_i > cur_i], comparing
/// the i-th best of each. Both inputs must be sorted ascending and hold at
/// least mu entries. Ties count as no improvement.
inline double success_metric(std::span<const double> prev_sorted,
                             std::span<const double> cur_sorted,
                             const RecombinationWeights& w) {
  const auto mu = static_cast<std::size_t>(w.mu);
  if (prev_sorted.size() < mu || cur_sorted.size() < mu)
    throw std::invalid_argument("success_metric: inputs shorter than mu");
  for (std::size_t i = 1; i < prev_sorted.size(); ++i)
    if (prev_sorted[i] < prev_sorted[i - 1])
      throw std::invalid_argument("success_metric: prev not sorted ascending");
  for (std::size_t i = 1; i < cur_sorted.size(); ++i)
    if (cur_sorted[i] < cur_sorted[i - 1])
      throw std::invalid_argument("success_metric: cur not sorted ascending");
  double L = 0.0;
  for (std::size_t i = 0; i < mu; ++i)
    if (prev_sorted[i] > cur_sorted[i]) L += w.omega[static_cast<Eigen::Index>(i)];
  return L;
}

/// W <- (1-c_sigma) W + sqrt(c_sigma (2-c_sigma) mu_eff) (2L - 1).
/// Under random selection the stationary distribution of W is ~N(0,1).
/// The weights sum to one only up to rounding, so L may poke a few ulp
/// past the boundaries; that slack is absorbed here.
inline void update_w(PtaState& s, double L, const RecombinationWeights& w) {
  if (L < -1e-9 || L > 1.0 + 1e-9)
    throw std::invalid_argument("update_w: L must lie in [0,1]");
  L = std::min(1.0, std::max(0.0, L));
  s.w = (1.0 - s.c_sigma) * s.w +
        std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * w.mu_eff) * (2.0 * L - 1.0);
}

/// sigma <- sigma exp((Phi(W) - 1 + alpha_z)/d_sigma): a z-test on W at
/// significance alpha_z. Grows sigma iff Phi(W) > 1 - alpha_z; the
/// multiplier is confined to [exp((alpha_z-1)/d_sigma), exp(alpha_z/d_sigma)].
inline double update_sigma(double sigma, const PtaState& s) {
  if (!(sigma > 0.0)) throw std::invalid_argument("update_sigma: sigma must be positive");
  return sigma * std::exp((normal_cdf(s.w) - 1.0 + s.alpha_z) / s.d_sigma);
}

}  // namespace mmes
