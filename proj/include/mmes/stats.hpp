#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmes {

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // population (1/N) variance
};

inline MeanVar mean_and_variance(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_and_variance: empty input");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size());
  return {m, v};
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty input");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = a x + b with the coefficient of determination.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: needs two same-length samples of size >= 2");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

/// Excess kurtosis m4/m2^2 - 3 using central moments.
inline double excess_kurtosis(std::span<const double> xs) {
  const auto mv = mean_and_variance(xs);
  if (mv.variance <= 0.0) throw std::domain_error("excess_kurtosis: zero variance");
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mv.mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(xs.size());
  return m4 / (mv.variance * mv.variance) - 3.0;
}

}  // namespace mmes
