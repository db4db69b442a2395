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

#include <algorithm>
#include <cmath>
#include <random>

#include "worp/bench.hpp"
#include "worp/rhh.hpp"

namespace worp {
namespace {

RhhConfig projection_cfg(std::size_t k = 10, double psi = 0.25, std::uint64_t n = 1 << 14, std::uint64_t seed = 5) {
  RhhConfig c;
  c.k = k;
  c.psi = psi;
  c.q = 2;
  c.n = n;
  c.seed = seed;
  return c;
}

RhhConfig counter_cfg(std::size_t k = 10, double psi = 0.25, std::uint64_t n = 1 << 14) {
  RhhConfig c = projection_cfg(k, psi, n);
  c.q = 1;
  return c;
}

TEST(RhhConfig, Sizes) {
  auto c = projection_cfg(100, 0.25, 1 << 14);
  EXPECT_GE(c.width(), 400u);
  EXPECT_EQ(c.width(), 2400u);
  EXPECT_EQ(c.rows(), static_cast<std::size_t>(std::ceil(4 * std::log((1 << 14) / 0.01))));
  EXPECT_EQ(counter_cfg(100, 0.25).capacity(), 1600u);
}

TEST(RhhConfig, RejectsBadParameters) {
  auto c = projection_cfg();
  c.psi = 0;
  EXPECT_THROW(ProjectionSketch<>{c}, ConfigError);
  c = projection_cfg();
  c.psi = 1.5;
  EXPECT_THROW(ProjectionSketch<>{c}, ConfigError);
  c = projection_cfg();
  c.k = 0;
  EXPECT_THROW(ProjectionSketch<>{c}, ConfigError);
  EXPECT_THROW(ProjectionSketch<>{counter_cfg()}, ConfigError);
  EXPECT_THROW(CounterSketch{projection_cfg()}, ConfigError);
}

TEST(Projection, FreshSketchEstimatesZero) {
  ProjectionSketch<> s(projection_cfg());
  for (std::uint64_t x = 0; x < 100; ++x) EXPECT_EQ(s.est(x), 0.0);
  EXPECT_TRUE(failure_test(s, 1));
}

TEST(Projection, SameSeedSameHashes) {
  ProjectionSketch<> a(projection_cfg()), b(projection_cfg());
  a.process(17, 1.0);
  b.process(17, 1.0);
  EXPECT_TRUE(a == b);
}

TEST(Projection, SingleKeyIsExact) {
  ProjectionSketch<> s(projection_cfg());
  s.process(42, 3.0);
  s.process(42, 4.0);
  EXPECT_EQ(s.est(42), 7.0);
  ProjectionSketch<FloatCell> f(projection_cfg());
  f.process(42, -7.5);
  EXPECT_EQ(f.est(42), -7.5);
}

TEST(Projection, RejectsKeysOutsideDomain) {
  ProjectionSketch<> s(projection_cfg(10, 0.25, 100));
  EXPECT_THROW(s.process(100, 1.0), DomainError);
  EXPECT_THROW((void)s.est(100), DomainError);
}

TEST(Projection, MergeWithEmptyIsIdentity) {
  ProjectionSketch<> s(projection_cfg()), empty(projection_cfg());
  for (std::uint64_t x = 0; x < 200; ++x) s.process(x, std::sin(static_cast<double>(x)));
  const auto before = s;
  s.merge(empty);
  EXPECT_TRUE(s == before);
}

TEST(Projection, MergeEqualsConcatenationBitExact) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 100);
  ProjectionSketch<> a(projection_cfg()), b(projection_cfg()), all(projection_cfg());
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t x = rng() % 3000;
    const double v = g(rng);
    (i % 3 ? a : b).process(x, v);
    all.process(x, v);
  }
  auto ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  EXPECT_TRUE(ab == all);
  EXPECT_TRUE(ba == all);
}

TEST(Projection, MergeMismatchThrows) {
  ProjectionSketch<> a(projection_cfg(10, 0.25, 1 << 14, 1)), b(projection_cfg(10, 0.25, 1 << 14, 2));
  EXPECT_THROW(a.merge(b), MergeError);
  ProjectionSketch<> c(projection_cfg(11));
  EXPECT_THROW(a.merge(c), MergeError);
}

TEST(Projection, FixedCellOverflowThrows) {
  ProjectionSketch<> s(projection_cfg());
  EXPECT_THROW(s.process(1, 1e300), DomainError);
}

TEST(Projection, EvenRowCountUsesLowerMedian) {
  // One bucket per row: each of the two rows reads 5 +- 1 for key 0. The
  // lower median is the smaller reading, so 4 shows up in about 3/4 of seeds.
  int fours = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto c = projection_cfg(1, 1.0, 4, seed);
    c.rows_override = 2;
    c.width_override = 1;
    ProjectionSketch<FloatCell> s(c);
    s.process(0, 5.0);
    s.process(1, 1.0);
    const double e = s.est(0);
    ASSERT_TRUE(e == 4.0 || e == 6.0);
    fours += e == 4.0;
  }
  EXPECT_GT(fours, 260);
}

TEST(Projection, UnbiasedOverSeeds) {
  // Odd row count: the median of sign-symmetric rows is unbiased.
  const auto v = gen_zipf(1.0, 400, 100.0);
  const std::uint64_t target = 7;
  std::vector<double> ests;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto c = projection_cfg(5, 1.0, 512, seed);
    c.rows_override = 5;
    c.width_override = 16;
    ProjectionSketch<> s(c);
    for (const auto& e : v) s.process(std::stoull(e.key), e.value);
    ests.push_back(s.est(target));
  }
  double m = 0, var = 0;
  for (double e : ests) m += e;
  m /= ests.size();
  for (double e : ests) var += (e - m) * (e - m);
  const double se = std::sqrt(var / (ests.size() - 1) / ests.size());
  EXPECT_NEAR(m, v.at("7"), 3 * se);
}

TEST(Projection, ContractOnThousandKeys) {
  // |est - nu|^2 <= (psi/k) ||tail_k(nu)||_2^2 for every key, in >= 1 - delta of runs.
  const std::size_t k = 10;
  const double psi = 0.25, delta = 0.05;
  std::mt19937_64 data_rng(3);
  std::vector<double> nu(1000);
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = 1000.0 / std::pow(i + 1.0, 1.2) * ((data_rng() & 1) ? 1 : -1);
  const double bound = psi / k * tail_norm_pow(nu, k, 2.0);
  int violations = 0;
  const int trials = 200;
  for (int seed = 0; seed < trials; ++seed) {
    auto c = projection_cfg(k, psi, 1000, seed);
    c.delta = delta;
    ProjectionSketch<> s(c);
    for (std::uint64_t x = 0; x < nu.size(); ++x) s.process(x, nu[x]);
    double worst = 0;
    for (std::uint64_t x = 0; x < nu.size(); ++x) worst = std::max(worst, std::pow(s.est(x) - nu[x], 2));
    violations += worst > bound;
  }
  EXPECT_LE(violations, delta * trials + 2 * std::sqrt(delta * trials));
}

TEST(Counter, UnderCapacityIsExact) {
  auto c = counter_cfg();
  c.capacity_override = 8;
  CounterSketch s(c);
  for (std::uint64_t x = 1; x <= 5; ++x)
    for (std::uint64_t r = 0; r < x; ++r) s.process(x, 1.0);
  for (std::uint64_t x = 1; x <= 5; ++x) {
    EXPECT_EQ(s.est(x), static_cast<double>(x));
    EXPECT_EQ(s.counter(x)->error, 0.0);
  }
  EXPECT_EQ(s.est(6), 0.0);
}

TEST(Counter, RejectsNegativeUpdates) {
  CounterSketch s(counter_cfg());
  EXPECT_THROW(s.process(1, -1.0), RejectedElement);
  EXPECT_THROW(s.process(1, std::nan("")), RejectedElement);
}

TEST(Counter, ErrorBoundsAndTailContract) {
  const std::size_t k = 10;
  const double psi = 0.25;
  std::mt19937_64 rng(4);
  std::vector<double> truth(2000, 0.0);
  CounterSketch s(counter_cfg(k, psi, 2000));
  std::vector<std::uint64_t> stream;
  for (std::uint64_t x = 0; x < truth.size(); ++x)
    for (int r = 0; r < static_cast<int>(500.0 / (x + 1)) + 1; ++r) stream.push_back(x);
  std::shuffle(stream.begin(), stream.end(), rng);
  for (auto x : stream) {
    s.process(x, 1.0);
    truth[x] += 1.0;
  }
  const double bound = psi / k * tail_norm_pow(truth, k, 1.0);
  EXPECT_LE(s.size(), s.capacity());
  for (std::uint64_t x = 0; x < truth.size(); ++x) {
    const double e = s.est(x);
    EXPECT_LE(std::abs(e - truth[x]), bound) << x;
    if (auto c = s.counter(x)) {
      EXPECT_GE(c->count, truth[x]);
      EXPECT_LE(c->count - c->error, truth[x]);
    }
  }
}

TEST(Counter, MergedBoundsHoldOnRandomSplit) {
  std::mt19937_64 rng(8);
  auto c = counter_cfg(10, 0.25, 500);
  for (int rep = 0; rep < 20; ++rep) {
    CounterSketch a(c), b(c);
    std::vector<double> truth(500, 0.0);
    for (int i = 0; i < 5000; ++i) {
      const std::uint64_t x = std::min<std::uint64_t>(499, static_cast<std::uint64_t>(std::exp(std::uniform_real_distribution<>(0, std::log(500.0))(rng))) - 1);
      const double v = 1.0 + static_cast<double>(rng() % 3);
      ((rng() & 1) ? a : b).process(x, v);
      truth[x] += v;
    }
    auto ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    EXPECT_TRUE(ab == ba);
    const double bound = c.psi / c.k * tail_norm_pow(truth, c.k, 1.0);
    for (std::uint64_t x = 0; x < 500; ++x) {
      if (auto ctr = ab.counter(x)) {
        EXPECT_GE(ctr->count, truth[x]);
        EXPECT_LE(ctr->count - ctr->error, truth[x]);
      }
      EXPECT_LE(std::abs(ab.est(x) - truth[x]), bound);
    }
  }
}

TEST(Counter, MergeMismatchThrows) {
  CounterSketch a(counter_cfg(10)), b(counter_cfg(11));
  EXPECT_THROW(a.merge(b), MergeError);
}

TEST(FailureTest, OneDominantKeyPasses) {
  ProjectionSketch<> s(projection_cfg(1, 0.25, 1000));
  s.process(3, 1000.0);
  for (std::uint64_t x = 10; x < 100; ++x) s.process(x, 1.0);
  EXPECT_FALSE(failure_test(s, 1));
  CounterSketch c(counter_cfg(1, 0.25, 1000));
  c.process(3, 1000.0);
  for (std::uint64_t x = 10; x < 100; ++x) c.process(x, 1.0);
  EXPECT_FALSE(failure_test(c, 1));
}

TEST(FailureTest, UniformStreamFails) {
  int fails = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = projection_cfg(10, 0.25, 4096, seed);
    ProjectionSketch<> s(c);
    for (std::uint64_t x = 0; x < 4000; ++x) s.process(x, 1.0);
    fails += failure_test(s, 10);
  }
  EXPECT_GE(fails, 95);
}

TEST(FailureTest, EmptySketchFails) {
  CounterSketch c(counter_cfg());
  EXPECT_TRUE(failure_test(c, 1));
}

}  // namespace
}  // namespace worp
