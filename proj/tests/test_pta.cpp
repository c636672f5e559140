#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mmes/pta.hpp"
#include "mmes/rng.hpp"
#include "mmes/stats.hpp"
#include "mmes/verify.hpp"

using mmes::PtaState;
using mmes::RecombinationWeights;
using mmes::RngStream;

TEST_CASE("recombination weights", "[pta]") {
  SECTION("hand-computed mu = 3") {
    const RecombinationWeights w(3);
    const double w1 = std::log(3.5) - std::log(1.0);
    const double w2 = std::log(3.5) - std::log(2.0);
    const double w3 = std::log(3.5) - std::log(3.0);
    const double s = w1 + w2 + w3;
    CHECK(w.omega[0] == Catch::Approx(w1 / s).margin(1e-15));
    CHECK(w.omega[1] == Catch::Approx(w2 / s).margin(1e-15));
    CHECK(w.omega[2] == Catch::Approx(w3 / s).margin(1e-15));
  }
  SECTION("normalized, strictly decreasing, positive for mu up to 512") {
    for (int mu = 1; mu <= 512; mu = mu < 16 ? mu + 1 : mu * 2) {
      const RecombinationWeights w(mu);
      CHECK(std::abs(w.omega.sum() - 1.0) <= 1e-12);
      CHECK(w.omega[mu - 1] > 0.0);
      for (int i = 1; i < mu; ++i) CHECK(w.omega[i] < w.omega[i - 1]);
      CHECK(w.mu_eff == Catch::Approx(1.0 / w.omega.squaredNorm()));
    }
  }
  CHECK_THROWS_AS(RecombinationWeights(0), std::invalid_argument);
}

TEST_CASE("success metric", "[pta]") {
  const RecombinationWeights w(3);
  const std::vector<double> prev = {1.0, 2.0, 3.0, 4.0};
  SECTION("improvement at every rank sums the weights to one") {
    const std::vector<double> cur = {0.1, 0.2, 0.3, 0.4};
    CHECK(mmes::success_metric(prev, cur, w) == Catch::Approx(1.0).margin(1e-15));
  }
  SECTION("no improvement anywhere gives zero; ties count as no improvement") {
    const std::vector<double> worse = {5.0, 6.0, 7.0, 8.0};
    CHECK(mmes::success_metric(prev, worse, w) == 0.0);
    CHECK(mmes::success_metric(prev, prev, w) == 0.0);
  }
  SECTION("partial improvement picks the matching weights") {
    const std::vector<double> cur = {0.5, 2.5, 2.9, 9.0};  // ranks 1 and 3 improve
    CHECK(mmes::success_metric(prev, cur, w) ==
          Catch::Approx(w.omega[0] + w.omega[2]).margin(1e-15));
  }
  SECTION("contract violations") {
    const std::vector<double> unsorted = {2.0, 1.0, 3.0};
    const std::vector<double> sorted3 = {1.0, 2.0, 3.0};
    const std::vector<double> descending = {3.0, 2.0, 1.0};
    const std::vector<double> short2 = {1.0, 2.0};
    CHECK_THROWS_AS(mmes::success_metric(unsorted, sorted3, w), std::invalid_argument);
    CHECK_THROWS_AS(mmes::success_metric(sorted3, descending, w), std::invalid_argument);
    CHECK_THROWS_AS(mmes::success_metric(short2, short2, w), std::invalid_argument);
  }
}

TEST_CASE("mean success under random fitness is one half", "[pta][stats]") {
  const int lambda = 24, mu = 12, gens = 100000;
  const RecombinationWeights w(mu);
  RngStream rng(55, 0);
  std::vector<double> prev(lambda), cur(lambda);
  for (auto& v : prev) v = rng.uniform01();
  std::sort(prev.begin(), prev.end());
  double acc = 0.0;
  for (int g = 0; g < gens; ++g) {
    for (auto& v : cur) v = rng.uniform01();
    std::sort(cur.begin(), cur.end());
    acc += mmes::success_metric(prev, cur, w);
    std::swap(prev, cur);
  }
  CHECK(std::abs(acc / gens - 0.5) < 0.01);
}

TEST_CASE("smoother update", "[pta]") {
  const RecombinationWeights w(12);
  SECTION("neutral success leaves W at zero") {
    PtaState s;
    mmes::update_w(s, 0.5, w);
    CHECK(s.w == 0.0);
  }
  SECTION("full success from rest gives the closed-form step") {
    PtaState s;
    s.c_sigma = 0.3;
    mmes::update_w(s, 1.0, w);
    CHECK(s.w == Catch::Approx(std::sqrt(0.3 * 1.7 * w.mu_eff)).margin(1e-14));
  }
  SECTION("L outside [0,1] is rejected") {
    PtaState s;
    CHECK_THROWS_AS(mmes::update_w(s, 1.5, w), std::invalid_argument);
  }
  SECTION("stationary variance under the null is one") {
    PtaState s;
    RngStream rng(66, 0);
    std::vector<double> ws;
    for (int g = 0; g < 100000; ++g) {
      double L = 0.0;
      for (int i = 0; i < 12; ++i)
        if (rng.uniform01() < 0.5) L += w.omega[i];
      mmes::update_w(s, L, w);
      ws.push_back(s.w);
    }
    const auto mv = mmes::mean_and_variance(ws);
    CHECK(mv.variance > 0.8);
    CHECK(mv.variance < 1.2);
  }
}

TEST_CASE("sigma update", "[pta]") {
  SECTION("neutral W shrinks by exp(-0.45) at the default parameters") {
    PtaState s;  // W = 0, d_sigma = 1, alpha_z = 0.05
    CHECK(mmes::update_sigma(1.0, s) == Catch::Approx(std::exp(-0.45)).margin(1e-14));
    CHECK(mmes::update_sigma(1.0, s) == Catch::Approx(0.63763).margin(5e-6));
  }
  SECTION("fixed point at Phi(W) = 1 - alpha_z") {
    PtaState s;
    s.w = mmes::normal_icdf(0.95);
    CHECK(mmes::update_sigma(3.0, s) == Catch::Approx(3.0).margin(1e-10));
  }
  SECTION("saturates at exp(alpha_z/d_sigma) for huge W") {
    PtaState s;
    s.w = 1e9;
    CHECK(mmes::update_sigma(1.0, s) == Catch::Approx(std::exp(0.05)).margin(1e-12));
  }
  SECTION("multiplier bounds are exact") {
    PtaState s;
    const double lo = std::exp((s.alpha_z - 1.0) / s.d_sigma);
    const double hi = std::exp(s.alpha_z / s.d_sigma);
    for (double w = -40.0; w <= 40.0; w += 0.25) {
      s.w = w;
      const double mult = mmes::update_sigma(1.0, s);
      CHECK(mult >= lo);
      CHECK(mult <= hi);
    }
  }
  SECTION("nonpositive sigma is rejected") {
    PtaState s;
    CHECK_THROWS_AS(mmes::update_sigma(0.0, s), std::invalid_argument);
  }
}

TEST_CASE("W null distribution is standard normal at mu = 12", "[pta][stats]") {
  RngStream rng(77, 0);
  const auto res = mmes::w_null_distribution_test(12, 30000, rng);
  CHECK(res.ks < res.ks_crit);
  CHECK(std::abs(res.mean) < 0.05);
  CHECK(res.variance > 0.8);
  CHECK(res.variance < 1.2);
}

TEST_CASE("W null distribution at mu = 2 (small-mu regime, informational)", "[pta][stats]") {
  RngStream rng(78, 0);
  const auto res = mmes::w_null_distribution_test(2, 30000, rng);
  // the normal approximation degrades at tiny mu; record, do not assert
  WARN("mu=2 thinned KS = " << res.ks << " (crit " << res.ks_crit
                            << "), var = " << res.variance);
  CHECK(res.variance > 0.5);  // the variance identity still holds broadly
  CHECK(res.variance < 1.5);
}
