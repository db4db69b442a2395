//  Copyright 2026 The worp Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "worp/bench.hpp"
#include "worp/calibration.hpp"

namespace worp {
namespace {

double harmonic(std::uint64_t n) {
  double h = 0;
  for (std::uint64_t i = 1; i <= n; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

TEST(SampleR, EmptyTailIsZero) {
  Rng rng(1);
  EXPECT_EQ(sample_R(10, 10, 1.0, rng), 0.0);
  EXPECT_THROW(sample_R(10, 11, 1.0, rng), DomainError);
  EXPECT_THROW(sample_R(10, 0, 1.0, rng), DomainError);
}

TEST(SampleR, TwoTermSymmetry) {
  Rng rng(2);
  double s = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) s += sample_R(2, 1, 1.0, rng);
  EXPECT_NEAR(s / n, 0.5, 0.002);
}

TEST(SampleR, MeanNearHarmonicEstimate) {
  Rng rng(3);
  double s = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) s += sample_R(10000, 100, 1.0, rng);
  const double approx = 100 * (harmonic(10000) - harmonic(100));
  EXPECT_NEAR(s / trials, approx, 0.2 * approx);
}

TEST(SampleR, MultiMatchesSingleDistribution) {
  // Same Exp sequence: the shared draw for one (k, rho) equals sample_R on a copy of the stream.
  Rng a(5), b(5);
  std::vector<double> out(2);
  sample_R_multi(500, {20}, {1.0, 2.0}, a, out.data());
  Rng b2 = b;
  EXPECT_NEAR(out[0], sample_R(500, 20, 1.0, b), 1e-9 * out[0]);
  EXPECT_NEAR(out[1], sample_R(500, 20, 2.0, b2), 1e-9 * out[1]);
}

TEST(EstimatePsi, RejectsTooFewTrials) {
  EXPECT_THROW(estimate_psi(1000, 10, 1.0, 0.01, 5000), CalibrationError);
  EXPECT_THROW(estimate_psi(1000, 1000, 1.0, 0.01, 20000), CalibrationError);
}

TEST(EstimatePsi, PsiIsKOverQuantile) {
  const auto c = estimate_psi(1000, 10, 1.0, 0.01, 10000, 4);
  EXPECT_DOUBLE_EQ(c.psi, 10.0 / c.quantile);
  EXPECT_LE(c.psi_ci[0], c.psi);
  EXPECT_GE(c.psi_ci[1], c.psi);
  EXPECT_DOUBLE_EQ(c.implied_c, 1.0 / (c.psi * std::log(100.0)));
  EXPECT_GE(c.B, 2u);
  EXPECT_LE(c.B, max_B);
}

TEST(EstimatePsi, ThreadCountDoesNotChangeResult) {
  const auto a = estimate_psi(500, 10, 2.0, 0.05, 4000, 7, 1);
  const auto b = estimate_psi(500, 10, 2.0, 0.05, 4000, 7, 3);
  EXPECT_EQ(a, b);
}

TEST(EstimatePsi, MonotoneInDeltaAndN) {
  const auto strict = estimate_psi(1000, 10, 1.0, 0.01, 20000, 9);
  const auto loose = estimate_psi(1000, 10, 1.0, 0.05, 20000, 9);
  EXPECT_GE(loose.psi, strict.psi);
  const auto big = estimate_psi(10000, 10, 1.0, 0.05, 20000, 9);
  EXPECT_LT(big.psi, loose.psi);
}

TEST(EstimatePsi, ImpliedConstantForLargerK) {
  // The k = 10, rho = 2 cell is checked by the acceptance run; here a cheaper
  // grid confirms the k >= 100 constants at n = 2000.
  CalibrationGrid g{2000, {100}, {1.0, 2.0}, 0.01, 20000, 3, 1, false};
  for (const auto& c : estimate_psi_grid(g)) EXPECT_LE(c.implied_c_ci[1], 1.4) << c.rho;
}

TEST(Erlang, ClosedForms) {
  EXPECT_LE(erlang_tail(1, 3.2, TailSide::upper), std::exp(-2.2) + 1e-15);
  EXPECT_LE(erlang_tail(50, 3.2, TailSide::upper), std::exp(-2.2) + 1e-15);
  EXPECT_EQ(erlang_tail(7, 1.0, TailSide::lower), 1.0);
  EXPECT_DOUBLE_EQ(erlang_tail(100, 2.0, TailSide::upper), 0.5 * std::exp(-100 * (1 - std::log(2.0))));
  EXPECT_THROW(erlang_tail(10, 0.5, TailSide::upper), DomainError);
  EXPECT_THROW(erlang_tail(10, 2.0, TailSide::lower), DomainError);
  EXPECT_THROW(erlang_tail(0.5, 2.0, TailSide::upper), DomainError);
}

TEST(Erlang, BoundsDominateMonteCarlo) {
  Rng rng(12);
  for (double l : {10.0, 100.0}) {
    const int draws = 100000;
    std::vector<double> xs(draws);
    for (auto& x : xs) x = draw_gamma(l, rng);
    for (double eps : {0.1, 0.5, 2.0, 3.2}) {
      const auto side = eps >= 1 ? TailSide::upper : TailSide::lower;
      std::size_t hits = 0;
      for (double x : xs) hits += side == TailSide::upper ? x >= eps * l : x <= eps * l;
      EXPECT_LE(static_cast<double>(hits) / draws, erlang_tail(l, eps, side)) << l << " " << eps;
    }
  }
}

TEST(GPrime, SymmetryAndRange) {
  Rng rng(13);
  double s = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double g = sample_G_prime(1.0, 1, 2, rng);
    ASSERT_LE(g, 1.0);
    s += g;
  }
  EXPECT_NEAR(s / n, 0.5, 0.002);
  EXPECT_THROW(sample_G_prime(1.0, 2, 2, rng), DomainError);
}

TEST(GPrime, SixtyThreeBlocksTail) {
  Rng rng(14);
  const int n = 1000000;
  int above = 0;
  for (int i = 0; i < n; ++i) above += sample_G_prime(1.0, 10, 630, rng) > 1.0 / 3.0;
  EXPECT_LE(static_cast<double>(above) / n, 3 * std::exp(-10.0));
}

TEST(ChooseB, RangeAndFloor) {
  const auto b = choose_B(100, 0.01);
  EXPECT_GE(b, 2u);
  EXPECT_LT(b, max_B);
  EXPECT_EQ(choose_B(100, 1.0), 2u);
  EXPECT_EQ(max_B, 63u);
  EXPECT_LE(choose_B(1, 1e-5, 200000), max_B);
}

TEST(Concentration, TailBelowThreeEMinusK) {
  for (std::uint64_t k : {5u, 10u}) {
    const double t = concentration_threshold(1000, k, 1.0);
    Rng rng(20 + k);
    const int trials = 100000;
    int above = 0;
    for (int i = 0; i < trials; ++i) above += sample_R(1000, k, 1.0, rng) >= t;
    const double bound = 3 * std::exp(-static_cast<double>(k));
    EXPECT_LE(static_cast<double>(above) / trials, bound + 3 * std::sqrt(bound / trials)) << k;
  }
}

TEST(Domination, UniformIsTight) {
  const auto v = gen_zipf(0.0, 1000);
  const auto rep = empirical_domination_check(v, 1.0, 1.0, 10, 20000, 3);
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.max_violation, 0.02);
}

TEST(Domination, SingleHeavyKey) {
  std::vector<FrequencyEntry> e{{"heavy", 1e6}};
  for (int i = 0; i < 200; ++i) e.push_back({"t" + std::to_string(i), 1.0});
  const auto rep = empirical_domination_check(FrequencyVector(e), 1.0, 2.0, 1, 20000, 4);
  EXPECT_TRUE(rep.passed);
}

TEST(Domination, RejectsBadArguments) {
  const auto v = gen_zipf(1.0, 10);
  EXPECT_THROW(empirical_domination_check(v, 2.0, 1.0, 2, 10), DomainError);
  EXPECT_THROW(empirical_domination_check(v, 1.0, 1.0, 10, 10), DomainError);
  EXPECT_THROW(empirical_domination_check(FrequencyVector(), 1.0, 1.0, 1, 10), DomainError);
}

}  // namespace
}  // namespace worp
