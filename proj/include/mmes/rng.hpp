#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#ifndef __SIZEOF_INT128__
#error "mmes::RngStream requires a compiler with __int128 support"
#endif

namespace mmes {

/// Standard normal CDF through the complementary error function.
/// Max absolute error is that of std::erfc, well below 1e-14.
inline double normal_cdf(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("normal_cdf: x must be finite");
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// Inverse standard normal CDF: Acklam's rational approximation polished by
/// one Halley step through std::erfc (absolute error ~1e-15 over (0,1)).
inline double normal_icdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("normal_icdf: p must lie in (0,1)");
  if (p > 0.5) return -normal_icdf(1.0 - p);

  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = 0.5 * std::erfc(-x * 0.70710678118654752440) - p;
  const double u = e * 2.506628274631000502 * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// Deterministic seeded random stream (pcg64, the XSL-RR 128/64 member of
/// the PCG family). 128-bit state, 128-bit stream selector; a fixed
/// (seed, stream) pair yields the same sequence on every platform.
/// Distinct stream ids on the same seed give statistically independent
/// sequences. Single-owner: never share one stream across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    inc_ = (static_cast<u128>(stream) << 1u) | 1u;
    state_ = 0u;
    step();
    state_ += seed;
    step();
  }

  std::uint64_t next_u64() {
    step();
    const auto xored = static_cast<std::uint64_t>((state_ >> 64u) ^ state_);
    const auto rot = static_cast<unsigned>(state_ >> 122u);
    return rot ? (xored >> rot) | (xored << ((64u - rot) & 63u)) : xored;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
  }

  /// Uniform double in the open interval (0, 1); safe for inverse-CDF use.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 11u) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
    return lo + (hi - lo) * uniform01();
  }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
    if (n < 1) throw std::invalid_argument("uniform_vector: n must be >= 1");
    if (!(lo < hi)) throw std::invalid_argument("uniform_vector: requires lo < hi");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = lo + (hi - lo) * uniform01();
    return v;
  }

  /// One N(0,1) draw via the inverse CDF; consumes exactly one uniform.
  double normal() { return normal_icdf(uniform01_open()); }

  Eigen::VectorXd standard_normal(Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("standard_normal: n must be >= 1");
    Eigen::VectorXd v(n);
    fill_standard_normal(v);
    return v;
  }

  void fill_standard_normal(Eigen::Ref<Eigen::VectorXd> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
  }

  /// Geometric draw on support {0,1,2,...} with P(j) = p(1-p)^j.
  std::uint64_t geometric(double p) {
    if (!(p > 0.0) || !(p < 1.0))
      throw std::invalid_argument("geometric: p must lie in (0,1)");
    const double u = uniform01();  // 1-u in (0,1]
    return static_cast<std::uint64_t>(std::log1p(-u) / std::log1p(-p));
  }

 private:
  using u128 = unsigned __int128;

  static constexpr u128 mult() {
    return (static_cast<u128>(0x2360ed051fc65da4ull) << 64u) | 0x4385df649fccf645ull;
  }

  void step() { state_ = state_ * mult() + inc_; }

  u128 state_ = 0;
  u128 inc_ = 1;
};

}  // namespace mmes
