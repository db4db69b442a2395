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
#include "worp/estimate.hpp"
#include "worp/pipeline.hpp"

namespace worp {
namespace {

TransformConfig tcfg(double p, std::uint64_t seed) {
  TransformConfig c;
  c.p = p;
  c.seed = seed;
  c.keyhash_n = 1ULL << 32;
  return c;
}

std::vector<WorSample> exact_runs(const FrequencyVector& v, std::size_t k, double p, int runs) {
  std::vector<WorSample> out;
  for (int seed = 0; seed < runs; ++seed) out.push_back(exact_bottomk_sample(v, k, tcfg(p, seed)));
  return out;
}

TEST(InclusionProb, Formula) {
  EXPECT_NEAR(inclusion_prob(2.0, 2.0, 1.0), 0.632121, 1e-6);
  EXPECT_NEAR(inclusion_prob(-2.0, 2.0, 1.0), 0.632121, 1e-6);
  EXPECT_DOUBLE_EQ(inclusion_prob(1e6, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(inclusion_prob(1.0, 2.0, 2.0, RDist::Uniform01), 0.25);
  EXPECT_DOUBLE_EQ(inclusion_prob(3.0, 2.0, 1.0, RDist::Uniform01), 1.0);
  EXPECT_THROW(inclusion_prob(1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(inclusion_prob(1.0, -1.0, 1.0), DomainError);
}

TEST(InclusionProb, MatchesConditionalSurvival) {
  // With the other keys' randomness fixed, the threshold seen by x is fixed
  // and x survives iff nu_x / r_x^(1/p) exceeds it.
  for (double p : {1.0, 2.0}) {
    const double nu = 3.0, tau = 4.0;
    const int trials = 100000;
    int kept = 0;
    for (int seed = 0; seed < trials; ++seed) kept += nu / r_root(draw_r("x", seed, RDist::Exp1), p) > tau;
    const double pr = inclusion_prob(nu, tau, p);
    EXPECT_NEAR(static_cast<double>(kept) / trials, pr, 3 * std::sqrt(pr * (1 - pr) / trials)) << p;
  }
}

TEST(Estimate, FullSampleIsExact) {
  const FrequencyVector v({{"a", 3}, {"b", -2}, {"c", 5}});
  WorSample s;
  s.underfull = true;
  for (const auto& e : v) s.entries.push_back({e.key, e.value, e.value});
  for (const auto& spec : {StatisticSpec::identity(), StatisticSpec::power(2), StatisticSpec::power(3)})
    EXPECT_DOUBLE_EQ(estimate_statistic(s, spec).value, spec.exact(v)) << spec.name();
  const auto e = as_elements(v);
  WorpConfig c;
  c.k = 5;
  c.keyhash_n = 1ULL << 32;
  c.psi = 0.5;
  const auto pipe = two_pass_sample(SpanSource(e), c);
  EXPECT_DOUBLE_EQ(estimate_statistic(pipe, StatisticSpec::identity()).value, 6.0);
}

TEST(Estimate, NonFiniteStatisticThrows) {
  WorSample s;
  s.tau = 1.0;
  s.entries.push_back({"a", 2.0, 2.0});
  const auto bad = StatisticSpec::custom([](double x) { return x == 2.0 ? INFINITY : 0.0; }, "bad");
  EXPECT_THROW(estimate_statistic(s, bad), EvaluationError);
}

TEST(Estimate, UnbiasedOnZipfTwo) {
  const auto v = gen_zipf(2.0, 10000);
  const auto runs = exact_runs(v, 100, 1.0, 100);
  std::vector<double> est;
  for (const auto& s : runs) est.push_back(estimate_statistic(s, StatisticSpec::identity()).value);
  const auto m = mean_stats(est);
  EXPECT_NEAR(m.mean, v.norm_pow(1.0), 3 * m.se);
}

TEST(Estimate, UnbiasedForSeveralMoments) {
  const auto v = gen_zipf(1.0, 1000);
  for (double p : {1.0, 2.0}) {
    const auto runs = exact_runs(v, 50, p, 500);
    for (const auto& spec : {StatisticSpec::identity(), StatisticSpec::power(2), StatisticSpec::power(3)}) {
      std::vector<double> est;
      for (const auto& s : runs) est.push_back(estimate_statistic(s, spec).value);
      const auto m = mean_stats(est);
      EXPECT_NEAR(m.mean, spec.exact(v), 3 * m.se) << p << " " << spec.name();
    }
  }
}

TEST(Estimate, NonSampledCoefficientsDoNotMatter) {
  const auto v = gen_zipf(1.0, 200);
  const auto s = exact_bottomk_sample(v, 20, tcfg(1.0, 4));
  std::map<std::string, double, std::less<>> all, trimmed;
  for (const auto& e : v) all[e.key] = 1.0 + std::stod(e.key) / 10;
  trimmed = all;
  const auto sampled = s.keys();
  for (const auto& e : v)
    if (std::find(sampled.begin(), sampled.end(), e.key) == sampled.end()) trimmed.erase(e.key);
  const auto spec = StatisticSpec::power(2);
  EXPECT_EQ(estimate_statistic(s, spec.with_coefficients(all)).value,
            estimate_statistic(s, spec.with_coefficients(trimmed)).value);
  for (const auto& e : v)
    if (!trimmed.contains(e.key)) {
      EXPECT_EQ(per_key_estimate(s, e.key, spec), 0.0);
    }
}

TEST(Estimate, SmallerThresholdNeverIncreasesEstimate) {
  WorSample s;
  s.p = 1.5;
  s.entries.push_back({"a", -4.0, -4.0});
  double prev = INFINITY;
  for (double tau = 10.0; tau > 0.01; tau *= 0.8) {
    s.tau = tau;
    const double e = std::abs(per_key_estimate(s, "a", StatisticSpec::identity()));
    EXPECT_LE(e, prev);
    EXPECT_GE(e, 4.0);
    prev = e;
  }
}

TEST(Nrmse, Definition) {
  const std::vector<double> e{9.0, 11.0};
  EXPECT_DOUBLE_EQ(nrmse(e, 10.0), 0.1);
  EXPECT_THROW(nrmse(e, 0.0), DomainError);
  EXPECT_THROW(nrmse(std::vector<double>{}, 1.0), DomainError);
}

TEST(VarianceBound, HoldsOnZipfOne) {
  const auto v = gen_zipf(1.0, 1000);
  const auto runs = exact_runs(v, 50, 1.0, 4000);
  const auto rep = variance_bound_check(runs, v, 1.0, 50);
  EXPECT_TRUE(rep.per_key_ok) << rep.max_ratio;
  EXPECT_TRUE(rep.sum_ok);
  EXPECT_LE(rep.sum_var, rep.sum_bound);
  EXPECT_EQ(rep.rows.size(), 1000u);
}

TEST(VarianceBound, ConditionalMatchesEmpiricalVariance) {
  const auto v = gen_zipf(1.0, 100);
  const auto runs = exact_runs(v, 10, 1.0, 20000);
  const auto rep = variance_bound_check(runs, v, 1.0, 10);
  for (const auto& r : rep.rows) {
    if (r.key != "1" && r.key != "5" && r.key != "30") continue;
    EXPECT_NEAR(r.conditional_var, r.empirical_var, 0.1 * r.empirical_var) << r.key;
  }
}

TEST(VarianceBound, RejectsDegenerateSetups) {
  const FrequencyVector two({{"a", 1}, {"b", 1}});
  const auto runs = exact_runs(two, 1, 1.0, 10);
  // With k = 1 and two equal keys the estimator's second moment diverges
  // logarithmically, so no finite bound applies.
  EXPECT_THROW(variance_bound_check(runs, two, 1.0, 1), DomainError);
  EXPECT_THROW(variance_bound_check(std::span(runs).first(1), two, 1.0, 2), DomainError);
}

TEST(Covariance, TwoDominantKeysAreNegativelyCorrelated) {
  std::vector<FrequencyEntry> e{{"a", 100}, {"b", 100}};
  for (int i = 0; i < 50; ++i) e.push_back({"t" + std::to_string(i), 1});
  const FrequencyVector v(e);
  const auto runs = exact_runs(v, 1, 1.0, 5000);
  const auto rep = covariance_sign_check(runs, "a", "b", StatisticSpec::identity());
  EXPECT_TRUE(rep.non_positive);
  EXPECT_LT(rep.covariance, -3 * rep.se);
  EXPECT_THROW(covariance_sign_check(runs, "a", "a", StatisticSpec::identity()), DomainError);
}

TEST(Covariance, TailKeysNearZero) {
  const auto v = gen_zipf(1.0, 500);
  const auto runs = exact_runs(v, 50, 1.0, 3000);
  const auto rep = covariance_sign_check(runs, "300", "301", StatisticSpec::identity());
  EXPECT_TRUE(rep.non_positive);
}

TEST(BiasReport, ExactRegimeHasNoBias) {
  const auto v = gen_zipf(2.0, 300, 1000.0);
  const auto e = as_elements(v);
  std::vector<WorSample> one, perfect;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    WorpConfig c;
    c.k = 10;
    c.p = 2.0;
    c.seed = seed;
    c.keyhash_n = 301;
    c.mapping = KeyMapping::Integer;
    c.rows = 9;
    c.width = 100000;
    c.psi = 0.5;
    one.push_back(OnePassWorp<ProjectionSketch<FloatCell>>(c).run(SpanSource(e)));
    perfect.push_back(exact_bottomk_sample(v, 10, c.transform()));
  }
  std::vector<std::string> keys;
  for (int i = 1; i <= 10; ++i) keys.push_back(std::to_string(i));
  const auto rep = bias_mse_report(one, perfect, v, StatisticSpec::power(2), 1e-3, keys);
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.max_bias_ratio, 1e-9);
  EXPECT_THROW(bias_mse_report(std::span(one).first(3), perfect, v, StatisticSpec::power(2), 0.1, keys),
               DomainError);
}

TEST(Smoothness, PowerFunctionConstant) {
  // For p >= 1, |(1+e)^p - 1| / e peaks at e = 1/2, so c = 1.5^p works
  // exactly when 1.5^p <= 2.
  std::vector<double> ws;
  for (double w = 0.01; w < 1000; w *= 1.7) ws.push_back(w);
  EXPECT_TRUE(smoothness_check([](double w) { return std::sqrt(w); }, std::sqrt(1.5), ws).holds);
  for (double p : {1.0, 1.5, 1.7}) {
    const auto rep = smoothness_check([p](double w) { return std::pow(w, p); }, std::pow(1.5, p), ws);
    EXPECT_TRUE(rep.holds) << p;
    EXPECT_NEAR(rep.required, 2 * (std::pow(1.5, p) - 1), 1e-9);
  }
  const auto two = smoothness_check([](double w) { return w * w; }, 2.25, ws);
  EXPECT_FALSE(two.holds);
  EXPECT_NEAR(two.required, 2.5, 1e-9);
}

}  // namespace
}  // namespace worp
