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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "worp/calibration.hpp"
#include "worp/core.hpp"
#include "worp/error.hpp"
#include "worp/parallel.hpp"

namespace worp {

/// A with-replacement l_p single sampler over a turnstile stream on [0, n).
class SingleSampler {
 public:
  virtual ~SingleSampler() = default;
  virtual void process(std::uint64_t key, double delta) = 0;
  // The sampled key, or nullopt for FAIL.
  virtual std::optional<std::uint64_t> finalize() = 0;
};

namespace detail {

// Draws an index with probability proportional to weights[i].
inline std::optional<std::size_t> draw_proportional(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return std::nullopt;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  std::size_t last = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Exact sampler: stores the aggregate and draws x with probability
/// |x|^p / ||x||_p^p. Stands in for a sketch-based perfect sampler.
class OracleSingleSampler final : public SingleSampler {
 public:
  OracleSingleSampler(double p, std::uint64_t seed) : p_(p), rng_(seed) {}

  void process(std::uint64_t key, double delta) override {
    double& v = freq_[key];
    v += delta;
  }

  std::optional<std::uint64_t> finalize() override {
    keys_.clear();
    weights_.clear();
    for (const auto& [k, v] : freq_) {
      if (v == 0.0) continue;
      keys_.push_back(k);
      weights_.push_back(std::pow(std::abs(v), p_));
    }
    const auto i = detail::draw_proportional(weights_, rng_);
    if (!i) return std::nullopt;
    return keys_[*i];
  }

 private:
  double p_;
  Rng rng_;
  std::map<std::uint64_t, double> freq_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> weights_;
};

/// Rejection sampler over a stored aggregate: propose a stored key
/// uniformly and accept with probability (|x| / max|x|)^p. Gives up after
/// `max_tries` proposals.
class RejectionSingleSampler final : public SingleSampler {
 public:
  RejectionSingleSampler(double p, std::uint64_t seed, std::size_t max_tries = 1 << 16)
      : p_(p), rng_(seed), max_tries_(max_tries) {}

  void process(std::uint64_t key, double delta) override { freq_[key] += delta; }

  std::optional<std::uint64_t> finalize() override {
    std::vector<std::pair<std::uint64_t, double>> live;
    double top = 0.0;
    for (const auto& [k, v] : freq_)
      if (v != 0.0) {
        live.emplace_back(k, std::abs(v));
        top = std::max(top, std::abs(v));
      }
    if (live.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t t = 0; t < max_tries_; ++t) {
      const auto& [k, v] = live[pick(rng_)];
      if (coin(rng_) < std::pow(v / top, p_)) return k;
    }
    return std::nullopt;
  }

 private:
  double p_;
  Rng rng_;
  std::size_t max_tries_;
  std::map<std::uint64_t, double> freq_;
};

/// Draws one key of v with probability |nu_x|^p / ||nu||_p^p.
inline std::string oracle_single_sampler(const FrequencyVector& v, double p, Rng& rng) {
  std::vector<double> w;
  w.reserve(v.size());
  for (const auto& e : v) w.push_back(std::pow(std::abs(e.value), p));
  const auto i = detail::draw_proportional(w, rng);
  if (!i) throw DomainError("oracle sampler needs a nonzero vector");
  return v.entries()[*i].key;
}

/// Exact frequencies behind the estimator interface used for subtraction.
class ExactFrequencies {
 public:
  void process(std::uint64_t key, double value) { freq_[key] += value; }
  double est(std::uint64_t key) const {
    auto it = freq_.find(key);
    return it == freq_.end() ? 0.0 : it->second;
  }

 private:
  std::unordered_map<std::uint64_t, double> freq_;
};

struct TvdConfig {
  std::size_t k = 1;
  double p = 1.0;
  std::uint64_t n = 1;
  std::size_t r = 0;  // number of single samplers; 0 selects 8k
  double M = 1e12;    // bound on |values| and intermediate frequencies

  std::size_t samplers() const { return r == 0 ? 8 * k : r; }

  void validate() const {
    if (k == 0) throw ConfigError("tvd: k must be >= 1");
    if (!(p > 0.0) || p > 2.0) throw ConfigError("tvd: p must be in (0, 2]");
    if (samplers() < k) throw ConfigError("tvd: need at least k samplers");
    if (!(M > 0.0) || !std::isfinite(M)) throw ConfigError("tvd: M must be positive and finite");
  }
};

struct TvdResult {
  std::vector<std::uint64_t> keys;  // discovery order; empty on FAIL
  std::size_t trials = 0;           // samplers consumed
  bool failed = false;
};

/// Feeds (key, value) updates to every sampler.
inline void feed_samplers(std::span<const std::pair<std::uint64_t, double>> stream,
                          std::span<const std::unique_ptr<SingleSampler>> samplers, const TvdConfig& cfg) {
  for (const auto& [key, value] : stream) {
    if (key >= cfg.n) throw DomainError("tvd: key outside [0, n)");
    if (!(std::abs(value) <= cfg.M)) throw RejectedElement("tvd: update magnitude exceeds M");
    for (const auto& s : samplers) s->process(key, value);
  }
}

/// Low-variation-distance WOR sampling. Samplers are finalized in order;
/// each newly discovered key x is removed from every later sampler by
/// feeding the update -R(x). Stops at k distinct keys or FAIL when the
/// samplers run out.
template <class Estimator>
TvdResult tvd_sample(std::span<const std::unique_ptr<SingleSampler>> samplers, const Estimator& R,
                     const TvdConfig& cfg) {
  cfg.validate();
  TvdResult res;
  for (std::size_t i = 0; i < samplers.size(); ++i) {
    ++res.trials;
    const auto out = samplers[i]->finalize();
    if (!out || std::find(res.keys.begin(), res.keys.end(), *out) != res.keys.end()) continue;
    res.keys.push_back(*out);
    if (res.keys.size() == cfg.k) return res;
    const double delta = -R.est(*out);
    for (std::size_t j = i + 1; j < samplers.size(); ++j) samplers[j]->process(*out, delta);
  }
  res.keys.clear();
  res.failed = true;
  return res;
}

enum class SamplerKind { oracle, rejection };

/// Builds cfg.samplers() independent samplers with seeds derived from `seed`.
inline std::vector<std::unique_ptr<SingleSampler>> make_samplers(SamplerKind kind, const TvdConfig& cfg,
                                                                 std::uint64_t seed) {
  std::vector<std::unique_ptr<SingleSampler>> out;
  out.reserve(cfg.samplers());
  for (std::size_t i = 0; i < cfg.samplers(); ++i) {
    const auto s = task_seed(seed, i);
    if (kind == SamplerKind::oracle)
      out.push_back(std::make_unique<OracleSingleSampler>(cfg.p, s));
    else
      out.push_back(std::make_unique<RejectionSingleSampler>(cfg.p, s));
  }
  return out;
}

/// One complete run with exact R: feed, then sample.
inline TvdResult tvd_run(std::span<const std::pair<std::uint64_t, double>> stream, const TvdConfig& cfg,
                         SamplerKind kind, std::uint64_t seed) {
  auto samplers = make_samplers(kind, cfg, seed);
  feed_samplers(stream, samplers, cfg);
  ExactFrequencies R;
  for (const auto& [k, v] : stream) R.process(k, v);
  return tvd_sample(std::span<const std::unique_ptr<SingleSampler>>(samplers), R, cfg);
}

struct TrialStats {
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_trials = 0.0;  // over successful runs
  std::size_t max_trials = 0;
  double fail_rate = 0.0;
  double threshold = 0.0;  // 2k plus three standard errors of a sum of k Geometric(1/2)
  bool within = false;
};

inline TrialStats trial_count_monitor(std::span<const TvdResult> runs, std::size_t k) {
  TrialStats st;
  st.runs = runs.size();
  double sum = 0.0;
  std::size_t ok = 0;
  for (const auto& r : runs) {
    if (r.failed) {
      ++st.failures;
      continue;
    }
    ++ok;
    sum += static_cast<double>(r.trials);
    st.max_trials = std::max(st.max_trials, r.trials);
  }
  st.mean_trials = ok ? sum / static_cast<double>(ok) : 0.0;
  st.fail_rate = st.runs ? static_cast<double>(st.failures) / static_cast<double>(st.runs) : 0.0;
  const double kd = static_cast<double>(k);
  st.threshold = 2.0 * kd + 3.0 * std::sqrt(2.0 * kd / std::max<double>(1.0, static_cast<double>(ok)));
  st.within = ok > 0 && st.mean_trials <= st.threshold;
  return st;
}

/// Probability of every k-subset (as a bitmask over key indices) under
/// successive weighted sampling without replacement with the given weights.
inline std::unordered_map<std::uint64_t, double> exact_wor_set_distribution(std::span<const double> weights,
                                                                           std::size_t k) {
  const std::size_t n = weights.size();
  if (n > 63) throw DomainError("set enumeration supports at most 63 keys");
  if (k == 0 || k > n) throw DomainError("set enumeration requires 1 <= k <= n");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::unordered_map<std::uint64_t, double> out;
  std::vector<std::size_t> idx(k);
  std::vector<bool> choose(n, false);
  std::fill(choose.begin(), choose.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::size_t j = 0;
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (choose[i]) {
        idx[j++] = i;
        mask |= 1ULL << i;
      }
    double p = 0.0;
    std::vector<std::size_t> perm = idx;
    do {
      double pr = 1.0, rest = total;
      for (std::size_t t = 0; t < k; ++t) {
        pr *= weights[perm[t]] / rest;
        rest -= weights[perm[t]];
      }
      p += pr;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out[mask] = p;
  } while (std::prev_permutation(choose.begin(), choose.end()));
  return out;
}

/// Half the L1 distance between two distributions over the same outcomes.
inline double total_variation(const std::unordered_map<std::uint64_t, double>& a,
                              const std::unordered_map<std::uint64_t, double>& b) {
  double d = 0.0;
  for (const auto& [k, pa] : a) {
    auto it = b.find(k);
    d += std::abs(pa - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, pb] : b)
    if (!a.contains(k)) d += std::abs(pb);
  return 0.5 * d;
}

}  // namespace worp
