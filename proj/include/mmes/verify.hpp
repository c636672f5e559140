#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mmes/archive.hpp"
#include "mmes/fms.hpp"
#include "mmes/pta.hpp"
#include "mmes/rng.hpp"
#include "mmes/stats.hpp"

namespace mmes {

/// A set of N_s sampled vectors (one per row) plus where they came from.
struct SampleBatch {
  enum class Provenance { Fms, TargetOracle };
  Eigen::MatrixXd samples;  // N_s x n
  Provenance provenance = Provenance::Fms;
};

/// Batch drawn through the real mixture-sampling path (archive selection
/// included). The archive is posed with the given q columns in identity
/// logical order, so column k carries selection weight alpha_{k+1}.
inline SampleBatch make_fms_batch(const MixtureParams& params, const Eigen::MatrixXd& q,
                                  RngStream& rng, Eigen::Index n_samples,
                                  BaseDistribution base = BaseDistribution::Gaussian) {
  DirectionArchive archive(q.rows(), params.m, 1);
  for (int j = 0; j < params.m; ++j) archive.preload(j, q.col(j));
  SampleBatch batch;
  batch.provenance = SampleBatch::Provenance::Fms;
  batch.samples.resize(n_samples, q.rows());
  Eigen::VectorXd z(q.rows());
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    sample_mutation(params, archive, rng, base, z);
    batch.samples.row(i) = z.transpose();
  }
  return batch;
}

/// Batch from the exact N(0, C_a) oracle (explicit selection weights, no
/// archive machinery) — the independent side of every dual-route check.
inline SampleBatch make_oracle_batch(const MixtureParams& params, const Eigen::MatrixXd& q,
                                     RngStream& rng, Eigen::Index n_samples) {
  SampleBatch batch;
  batch.provenance = SampleBatch::Provenance::TargetOracle;
  batch.samples.resize(n_samples, q.rows());
  Eigen::VectorXd z(q.rows());
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    sample_target(params, q, rng, z);
    batch.samples.row(i) = z.transpose();
  }
  return batch;
}

namespace detail {
inline bool is_exactly_diagonal(const Eigen::MatrixXd& c) {
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      if (i != j && c(i, j) != 0.0) return false;
  return true;
}
}  // namespace detail

/// Normalized variance: mean squared norm of the whitened samples divided
/// by n. Whitening uses the symmetric inverse square root of `cov`
/// (eigendecomposition); an exactly diagonal `cov` short-circuits to
/// per-coordinate scaling, which keeps the n=1000 ladder scenario cheap.
inline double nv_metric(const SampleBatch& batch, const Eigen::MatrixXd& cov) {
  const Eigen::Index n = batch.samples.cols();
  const Eigen::Index ns = batch.samples.rows();
  if (cov.rows() != n || cov.cols() != n)
    throw std::invalid_argument("nv_metric: covariance shape mismatch");
  if (ns < 1) throw std::invalid_argument("nv_metric: empty batch");

  if (detail::is_exactly_diagonal(cov)) {
    const Eigen::VectorXd d = cov.diagonal();
    if ((d.array() <= 0.0).any())
      throw std::domain_error("nv_metric: covariance is not positive definite");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ns; ++i)
      acc += (batch.samples.row(i).transpose().array().square() / d.array()).sum();
    return acc / static_cast<double>(n * ns);
  }

  if (n > 2048) throw std::invalid_argument("nv_metric: dense whitening limited to n <= 2048");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::domain_error("nv_metric: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-12 * std::max(ev.maxCoeff(), 0.0))
    throw std::domain_error("nv_metric: covariance is not positive definite");
  const Eigen::MatrixXd proj = batch.samples * es.eigenvectors();  // N_s x n
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ns; ++i)
    acc += (proj.row(i).transpose().array().square() / ev.array()).sum();
  return acc / static_cast<double>(n * ns);
}

/// k-th moment of N(0,1): (k-1)!! for even k, 0 for odd k.
inline double standard_normal_moment(int k) {
  if (k < 0) throw std::invalid_argument("standard_normal_moment: k must be >= 0");
  if (k % 2 != 0) return 0.0;
  double m = 1.0;
  for (int i = k - 1; i > 1; i -= 2) m *= i;
  return m;
}

namespace detail {
inline double pow_int(double x, int k) {
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= x;
    x *= x;
    k >>= 1;
  }
  return r;
}
}  // namespace detail

/// Mean standardized k-th moment (1/(n N_s)) sum_{i,j} (y_{ij}/delta_j)^k,
/// where delta_j is the per-coordinate sample standard deviation of the
/// batch itself.
inline double standardized_moment_mean(const SampleBatch& batch, int k) {
  const Eigen::Index n = batch.samples.cols();
  const Eigen::Index ns = batch.samples.rows();
  if (ns < 2) throw std::invalid_argument("standardized_moment_mean: batch too small");
  if (k < 1) throw std::invalid_argument("standardized_moment_mean: k must be >= 1");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto col = batch.samples.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    if (var <= 0.0)
      throw std::domain_error("standardized_moment_mean: zero variance along coordinate " +
                              std::to_string(j));
    const double inv = 1.0 / std::sqrt(var);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ns; ++i) s += detail::pow_int(col[i] * inv, k);
    acc += s;
  }
  return acc / static_cast<double>(n * ns);
}

/// Standardized moment error vs the standard normal (tau_4 = 3, tau_6 = 15).
inline double sme_metric(const SampleBatch& batch, int k) {
  if (k < 4 || k % 2 != 0)
    throw std::invalid_argument("sme_metric: k must be even and >= 4");
  return standardized_moment_mean(batch, k) - standard_normal_moment(k);
}

/// Empirical excess kurtosis of the batch projected onto a unit direction.
inline double projected_kurtosis(const SampleBatch& batch, const Eigen::VectorXd& direction) {
  if (direction.size() != batch.samples.cols())
    throw std::invalid_argument("projected_kurtosis: direction dimension mismatch");
  if (std::abs(direction.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("projected_kurtosis: direction must be a unit vector");
  const Eigen::VectorXd p = batch.samples * direction;
  std::vector<double> v(p.data(), p.data() + p.size());
  return excess_kurtosis(v);
}

/// Kolmogorov–Smirnov distance of a sample against the N(0,1) CDF.
inline double ks_distance(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = normal_cdf(xs[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - cdf);
    d = std::max(d, cdf - static_cast<double>(i) / n);
  }
  return d;
}

/// Asymptotic KS critical value at significance 0.01 or 0.05.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
  double k;
  if (alpha == 0.01) k = 1.6276;
  else if (alpha == 0.05) k = 1.3581;
  else throw std::invalid_argument("ks_critical: alpha must be 0.01 or 0.05");
  return k / std::sqrt(static_cast<double>(n));
}

struct WNullResult {
  double ks = 0.0;             // KS distance of the thinned W chain vs N(0,1)
  double ks_crit = 0.0;        // critical value at significance 0.01
  std::size_t ks_samples = 0;  // size of the thinned sample
  double mean = 0.0;           // moments over the full chain
  double variance = 0.0;
};

/// Simulates the smoothed success statistic under random selection
/// (rank-improvement indicators i.i.d. Bernoulli(1/2), the null of the
/// paired test) and compares the stationary W distribution to N(0,1).
/// W is an AR(1) chain with coefficient 1-c_sigma, so the KS test runs on
/// a chain thinned by ~3 autocorrelation times (interval ceil(3/c_sigma));
/// consecutive samples would violate the KS independence assumption.
/// Moments are taken over the full chain.
inline WNullResult w_null_distribution_test(int mu, std::int64_t generations, RngStream& rng,
                                            double c_sigma = 0.3, int thin = 0) {
  if (mu < 2) throw std::invalid_argument("w_null_distribution_test: mu must be >= 2");
  if (generations < 100) throw std::invalid_argument("w_null_distribution_test: too few generations");
  if (thin <= 0) thin = static_cast<int>(std::ceil(3.0 / c_sigma));
  const RecombinationWeights w(mu);
  PtaState s;
  s.c_sigma = c_sigma;
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(generations));
  std::vector<double> thinned;
  thinned.reserve(static_cast<std::size_t>(generations / thin + 1));
  for (std::int64_t g = 0; g < generations; ++g) {
    double L = 0.0;
    for (int i = 0; i < mu; ++i)
      if (rng.uniform01() < 0.5) L += w.omega[i];
    update_w(s, L, w);
    all.push_back(s.w);
    if ((g + 1) % thin == 0) thinned.push_back(s.w);
  }
  WNullResult r;
  r.ks = ks_distance(thinned);
  r.ks_crit = ks_critical(thinned.size(), 0.01);
  r.ks_samples = thinned.size();
  const auto mv = mean_and_variance(all);
  r.mean = mv.mean;
  r.variance = mv.variance;
  return r;
}

/// The separable verification scenario: m direction vectors, the i-th
/// holding a single nonzero q_{i,i} = 10^{3(i-1)/m}, so both the mixture
/// and the target distribution factor per coordinate.
struct DiagonalLadder {
  int m = 200;
  Eigen::Index n = 1000;
  double c_a = 0.0;
  int l = 4;

  /// The standard instance: m=200, n=1000, c_a = 4/n (the optimizer's own
  /// learning rate at this dimension).
  static DiagonalLadder standard(int l = 4) { return {200, 1000, 4.0 / 1000.0, l}; }

  MixtureParams params() const { return MixtureParams::make(c_a, m, l); }

  Eigen::MatrixXd q() const {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, m);
    for (int i = 1; i <= m; ++i)
      q(i - 1, i - 1) = std::pow(10.0, 3.0 * (i - 1) / static_cast<double>(m));
    return q;
  }

  /// Exact covariance, which is diagonal here:
  /// (1-c_a)^m + gamma alpha_i q_{i,i}^2 on the ladder coordinates.
  Eigen::MatrixXd covariance() const {
    const auto p = params();
    const Eigen::VectorXd alpha = p.selection_weights();
    Eigen::VectorXd d = Eigen::VectorXd::Constant(n, std::pow(1.0 - c_a, m));
    for (int i = 0; i < m; ++i) {
      const double qi = std::pow(10.0, 3.0 * i / static_cast<double>(m));
      d[i] += p.gamma * alpha[i] * qi * qi;
    }
    return d.asDiagonal();
  }
};

struct LadderMetricsRow {
  int l = 0;
  double nv = 0.0;
  double sme4 = 0.0;
  double sme6 = 0.0;
  double min_kurtosis = 0.0;  // over random unit projection directions
};

/// Samples an FMS batch per mixing strength on the ladder scenario and
/// evaluates every distribution metric on it.
inline std::vector<LadderMetricsRow> ladder_metrics(DiagonalLadder ladder,
                                                    const std::vector<int>& l_values,
                                                    Eigen::Index n_samples, std::uint64_t seed,
                                                    int kurtosis_dirs = 50) {
  const Eigen::MatrixXd q = ladder.q();
  const Eigen::MatrixXd cov = ladder.covariance();
  std::vector<LadderMetricsRow> rows;
  for (const int l : l_values) {
    ladder.l = l;
    RngStream rng(seed, 100 + static_cast<std::uint64_t>(l));
    const SampleBatch batch = make_fms_batch(ladder.params(), q, rng, n_samples);
    LadderMetricsRow row;
    row.l = l;
    row.nv = nv_metric(batch, cov);
    row.sme4 = sme_metric(batch, 4);
    row.sme6 = sme_metric(batch, 6);
    RngStream dir_rng(seed, 200 + static_cast<std::uint64_t>(l));
    double mk = std::numeric_limits<double>::infinity();
    for (int d = 0; d < kurtosis_dirs; ++d) {
      Eigen::VectorXd dir = dir_rng.standard_normal(ladder.n);
      dir /= dir.norm();
      mk = std::min(mk, projected_kurtosis(batch, dir));
    }
    row.min_kurtosis = mk;
    rows.push_back(row);
  }
  return rows;
}

/// Reference curve for the 4th-order moment error on the standard ladder.
inline double sme4_reference(int l) { return 69.66 / (l + 0.04); }

}  // namespace mmes
