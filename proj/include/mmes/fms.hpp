#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "mmes/archive.hpp"
#include "mmes/rng.hpp"

namespace mmes {

/// Parameters of the mixture sampler: mixing strength l, learning rate c_a,
/// archive size m, and the induced regularizer gamma = 1 - (1-c_a)^m.
struct MixtureParams {
  int l = 4;
  double c_a = 0.0;
  int m = 0;
  double gamma = 0.0;

  static MixtureParams make(double c_a, int m, int l) {
    if (!(c_a > 0.0) || !(c_a < 1.0))
      throw std::invalid_argument("MixtureParams: c_a must lie in (0,1)");
    if (m < 1 || l < 1) throw std::invalid_argument("MixtureParams: need m >= 1, l >= 1");
    MixtureParams p;
    p.l = l;
    p.c_a = c_a;
    p.m = m;
    p.gamma = 1.0 - std::pow(1.0 - c_a, m);
    return p;
  }

  /// Implied selection weights alpha_k = c_a (1-c_a)^{m-k} / gamma,
  /// k = 1..m (index 0 holds alpha_1). They sum to one by construction.
  Eigen::VectorXd selection_weights() const {
    Eigen::VectorXd a(m);
    for (int k = 1; k <= m; ++k)
      a[k - 1] = c_a * std::pow(1.0 - c_a, m - k) / gamma;
    return a;
  }
};

/// Distribution of the isotropic component; each variant has unit
/// per-coordinate variance.
enum class BaseDistribution { Gaussian, StudentT, Rademacher };

inline BaseDistribution base_distribution_from_string(std::string_view s) {
  if (s == "gaussian") return BaseDistribution::Gaussian;
  if (s == "student-t") return BaseDistribution::StudentT;
  if (s == "rademacher") return BaseDistribution::Rademacher;
  throw std::invalid_argument("unknown base distribution '" + std::string(s) + "'");
}

inline const char* to_string(BaseDistribution b) {
  switch (b) {
    case BaseDistribution::Gaussian: return "gaussian";
    case BaseDistribution::StudentT: return "student-t";
    case BaseDistribution::Rademacher: return "rademacher";
  }
  return "?";
}

/// Fills `out` with i.i.d. unit-variance draws from the base distribution.
/// StudentT uses 5 degrees of freedom scaled by sqrt(3/5).
inline void draw_base(BaseDistribution base, RngStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  switch (base) {
    case BaseDistribution::Gaussian:
      rng.fill_standard_normal(out);
      return;
    case BaseDistribution::StudentT: {
      constexpr int dof = 5;
      for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double z = rng.normal();
        double chi2 = 0.0;
        for (int k = 0; k < dof; ++k) {
          const double g = rng.normal();
          chi2 += g * g;
        }
        out[i] = z * std::sqrt(static_cast<double>(dof - 2) / chi2);
      }
      return;
    }
    case BaseDistribution::Rademacher:
      for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return;
  }
  throw std::logic_error("draw_base: unknown base distribution");
}

/// One mutation vector: sqrt(1-gamma) b + sqrt(gamma/l) sum_j q_{i_j} z_j
/// with the l archive entries chosen through the geometric index rule.
/// Consumes, in order, one n-vector base draw, l scalar normals, and l
/// geometric draws. Cost O(l n), independent of the archive size.
inline void sample_mutation(const MixtureParams& params, const DirectionArchive& archive,
                            RngStream& rng, BaseDistribution base,
                            Eigen::Ref<Eigen::VectorXd> out) {
  if (archive.size() != params.m)
    throw std::invalid_argument("sample_mutation: archive size does not match params.m");
  if (out.size() != archive.dim())
    throw std::invalid_argument("sample_mutation: output dimension mismatch");
  draw_base(base, rng, out);
  out *= std::sqrt(1.0 - params.gamma);
  const double coef = std::sqrt(params.gamma / params.l);
  thread_local Eigen::VectorXd zs;
  zs.resize(params.l);
  rng.fill_standard_normal(zs);
  for (int j = 0; j < params.l; ++j) {
    const int slot = archive.select_physical_index(rng, params.c_a);
    out.noalias() += (coef * zs[j]) * archive.vector(slot);
  }
}

inline Eigen::VectorXd sample_mutation(const MixtureParams& params,
                                       const DirectionArchive& archive, RngStream& rng,
                                       BaseDistribution base = BaseDistribution::Gaussian) {
  Eigen::VectorXd out(archive.dim());
  sample_mutation(params, archive, rng, base, out);
  return out;
}

/// The exact covariance targeted by the sampler,
/// (1-c_a)^m I + c_a sum_j (1-c_a)^{m-j} q_j q_j^T, materialized densely.
/// Verification-only; refuses n > 2048.
inline Eigen::MatrixXd target_covariance(const MixtureParams& params, const Eigen::MatrixXd& q) {
  const Eigen::Index n = q.rows();
  if (q.cols() != params.m)
    throw std::invalid_argument("target_covariance: q must have m columns");
  if (n > 2048)
    throw std::invalid_argument("target_covariance: refusing to materialize n > 2048");
  Eigen::MatrixXd c = std::pow(1.0 - params.c_a, params.m) *
                      Eigen::MatrixXd::Identity(n, n);
  for (int j = 1; j <= params.m; ++j) {
    const double w = params.c_a * std::pow(1.0 - params.c_a, params.m - j);
    c.selfadjointView<Eigen::Lower>().rankUpdate(q.col(j - 1), w);
  }
  return c.selfadjointView<Eigen::Lower>();
}

/// Exact draw from N(0, C_a) through the rank-1 decomposition
/// sqrt(1-gamma) z_0 + sum_j sqrt(gamma alpha_j) q_j z_j. Costs O(n m) and
/// serves as the oracle (and direct-sampling baseline) the mixture sampler
/// is checked against.
inline void sample_target(const MixtureParams& params, const Eigen::MatrixXd& q, RngStream& rng,
                          Eigen::Ref<Eigen::VectorXd> out) {
  if (q.cols() != params.m)
    throw std::invalid_argument("sample_target: q must have m columns");
  if (out.size() != q.rows())
    throw std::invalid_argument("sample_target: output dimension mismatch");
  rng.fill_standard_normal(out);
  out *= std::sqrt(1.0 - params.gamma);
  for (int j = 1; j <= params.m; ++j) {
    // gamma alpha_j = c_a (1-c_a)^{m-j}
    const double w = std::sqrt(params.c_a * std::pow(1.0 - params.c_a, params.m - j));
    out.noalias() += (w * rng.normal()) * q.col(j - 1);
  }
}

inline Eigen::VectorXd sample_target(const MixtureParams& params, const Eigen::MatrixXd& q,
                                     RngStream& rng) {
  Eigen::VectorXd out(q.rows());
  sample_target(params, q, rng, out);
  return out;
}

}  // namespace mmes
