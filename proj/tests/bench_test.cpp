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
#include <sstream>

#include "worp/bench.hpp"

namespace worp {
namespace {

TEST(Zipf, Values) {
  const auto u = gen_zipf(0.0, 5, 2.0);
  for (const auto& e : u) EXPECT_EQ(e.value, 2.0);
  const auto z = gen_zipf(1.0, 3);
  EXPECT_EQ(z.at("1"), 1.0);
  EXPECT_EQ(z.at("2"), 0.5);
  EXPECT_DOUBLE_EQ(z.at("3"), 1.0 / 3);
  EXPECT_NEAR(gen_zipf(1.0, 10000).norm_pow(1.0), 9.787606, 1e-6);
  EXPECT_THROW(gen_zipf(-1.0, 3), ConfigError);
  EXPECT_THROW(gen_zipf(1.0, 0), ConfigError);
}

TEST(PerfectWr, SingleKeyHasEffectiveSizeOne) {
  Rng rng(1);
  const auto d = perfect_wr_sample(FrequencyVector({{"x", 3}}), 50, 1.0, rng);
  EXPECT_EQ(d.size(), 50u);
  EXPECT_EQ(effective_size(d), 1u);
}

TEST(PerfectWr, UniformEffectiveSizeNearK) {
  const std::uint64_t n = 100000;
  const std::size_t k = 100;
  const auto v = gen_zipf(0.0, n);
  Rng rng(2);
  double total = 0;
  for (int i = 0; i < 200; ++i) total += effective_size(perfect_wr_sample(v, k, 1.0, rng));
  const double expect = n * (1 - std::pow(1 - 1.0 / n, static_cast<double>(k)));
  EXPECT_NEAR(total / 200, expect, 0.05);
}

TEST(PerfectWr, SkewedEffectiveSizeIsSmall) {
  const auto v = gen_zipf(2.0, 10000);
  Rng rng(3);
  double total = 0;
  for (int i = 0; i < 50; ++i) total += effective_size(perfect_wr_sample(v, 100, 2.0, rng));
  EXPECT_LT(total / 50, 20.0);
  RecordProperty("mean_effective_size", std::to_string(total / 50));
}

TEST(PerfectWr, EstimatorIsUnbiased) {
  const auto v = gen_zipf(1.0, 300);
  const auto spec = StatisticSpec::power(2);
  Rng rng(4);
  std::vector<double> est;
  for (int i = 0; i < 4000; ++i) est.push_back(wr_estimate(perfect_wr_sample(v, 20, 1.0, rng), v, 1.0, spec));
  const auto m = mean_stats(est);
  EXPECT_NEAR(m.mean, spec.exact(v), 3 * m.se);
}

TEST(Pipelines, NamesRoundTrip) {
  for (auto p : {Pipeline::perfectWR, Pipeline::perfectWOR, Pipeline::worp1, Pipeline::worp2, Pipeline::tvd})
    EXPECT_EQ(pipeline_from(to_string(p)), p);
  EXPECT_THROW(pipeline_from("nope"), ConfigError);
}

Scenario small_scenario() {
  Scenario sc;
  sc.alpha = 2.0;
  sc.n = 500;
  sc.k = 10;
  sc.runs = 5;
  sc.stats = {1.0, 2.0};
  sc.pipelines = {Pipeline::perfectWR, Pipeline::perfectWOR, Pipeline::worp1, Pipeline::worp2, Pipeline::tvd};
  return sc;
}

std::string all_csv(const Scenario& sc, const ScenarioResult& r) {
  std::ostringstream os;
  write_summary_csv(os, sc, r);
  write_runs_csv(os, r);
  write_curves_csv(os, r);
  write_effective_csv(os, r);
  return os.str();
}

TEST(Scenario, ReproducibleCsv) {
  auto sc = small_scenario();
  const auto a = all_csv(sc, run_scenario(sc, nullptr, nullptr));
  sc.threads = 3;
  const auto b = all_csv(sc, run_scenario(sc, nullptr, nullptr));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("distribution,alpha,n,k,p,q,stat,pipeline,runs,failures,truth,mean_estimate,nrmse"),
            std::string::npos);
}

TEST(Scenario, OversizedSketchMatchesPerfectWor) {
  auto sc = small_scenario();
  sc.runs = 10;
  sc.rows = 9;
  sc.width = 5000;
  const auto r = run_scenario(sc, nullptr, nullptr);
  EXPECT_EQ(r.worp2_runs, 10u);
  EXPECT_EQ(r.worp2_matches, 10u);
  for (std::size_t i = 0; i < r.runs.size(); i += 1) {
    const auto& x = r.runs[i];
    if (x.pipeline != Pipeline::worp2) continue;
    const auto& perf = r.runs[i - 2 * sc.stats.size()];
    ASSERT_EQ(perf.pipeline, Pipeline::perfectWOR);
    EXPECT_EQ(x.estimate, perf.estimate);
  }
  std::size_t tvd_fail = 0;
  for (const auto& s : r.summary)
    if (s.pipeline == Pipeline::tvd) tvd_fail = s.failures;
  EXPECT_EQ(tvd_fail, 0u);
}

TEST(Scenario, RejectsBadInput) {
  auto sc = small_scenario();
  sc.runs = 0;
  EXPECT_THROW(run_scenario(sc, nullptr, nullptr), ConfigError);
  sc = small_scenario();
  sc.distribution = "weird";
  EXPECT_THROW(run_scenario(sc, nullptr, nullptr), ConfigError);
}

TEST(RankFrequency, FullSampleIsExact) {
  WorSample s;
  s.underfull = true;
  s.entries = {{"a", 5, 5}, {"b", -2, -2}, {"c", 3, 3}};
  const auto c = rank_frequency_curve(s);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (std::pair<double, double>{1, 5}));
  EXPECT_EQ(c[2], (std::pair<double, double>{3, 2}));
}

}  // namespace
}  // namespace worp
