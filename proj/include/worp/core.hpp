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
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "worp/error.hpp"
#include "worp/hash.hpp"

namespace worp {

/// One unaggregated stream update.
struct Element {
  std::string key;
  double value = 0.0;

  friend bool operator==(const Element&, const Element&) = default;
};

inline void validate_element(const Element& e) {
  if (e.key.empty()) throw RejectedElement("element has an empty key");
  if (!std::isfinite(e.value)) throw RejectedElement("element '" + e.key + "' has a non-finite value");
}

struct FrequencyEntry {
  std::string key;
  double value = 0.0;

  friend bool operator==(const FrequencyEntry&, const FrequencyEntry&) = default;
};

/// Aggregated key -> signed frequency map. Entries are kept sorted by key
/// bytes; absent keys have frequency 0 and no stored entry is exactly zero.
class FrequencyVector {
 public:
  FrequencyVector() = default;

  // Builds from arbitrary (key, value) pairs; duplicate keys are summed and
  // zero results dropped.
  explicit FrequencyVector(std::vector<FrequencyEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const FrequencyEntry& a, const FrequencyEntry& b) { return a.key < b.key; });
    for (auto& e : entries) {
      if (!entries_.empty() && entries_.back().key == e.key) {
        entries_.back().value += e.value;
      } else {
        entries_.push_back(std::move(e));
      }
    }
    std::erase_if(entries_, [](const FrequencyEntry& e) { return e.value == 0.0; });
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<FrequencyEntry>& entries() const noexcept { return entries_; }

  double at(std::string_view key) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const FrequencyEntry& e, std::string_view k) { return e.key < k; });
    return (it != entries_.end() && it->key == key) ? it->value : 0.0;
  }
  bool contains(std::string_view key) const noexcept { return at(key) != 0.0; }

  /// ||v||_q^q
  double norm_pow(double q) const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += std::pow(std::abs(e.value), q);
    return s;
  }

  std::vector<double> magnitudes() const {
    std::vector<double> m;
    m.reserve(entries_.size());
    for (const auto& e : entries_) m.push_back(std::abs(e.value));
    return m;
  }

  FrequencyVector scaled(double c) const {
    FrequencyVector out = *this;
    for (auto& e : out.entries_) e.value *= c;
    std::erase_if(out.entries_, [](const FrequencyEntry& e) { return e.value == 0.0; });
    return out;
  }

  friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;

 private:
  std::vector<FrequencyEntry> entries_;
};

enum class AggregateMode {
  floating,
  // Values must be integers with magnitude below 2^53; sums are exact.
  exact_integer,
};

/// Sums element values per key. Keys whose values cancel exactly are removed.
template <std::ranges::input_range Stream>
  requires std::convertible_to<std::ranges::range_reference_t<Stream>, const Element&>
FrequencyVector aggregate(Stream&& stream, AggregateMode mode = AggregateMode::floating) {
  std::vector<FrequencyEntry> out;
  if (mode == AggregateMode::floating) {
    std::unordered_map<std::string, double> sums;
    for (const Element& e : stream) {
      validate_element(e);
      sums[e.key] += e.value;
    }
    out.reserve(sums.size());
    for (auto& [k, v] : sums) out.push_back({k, v});
  } else {
    std::unordered_map<std::string, std::int64_t> sums;
    for (const Element& e : stream) {
      validate_element(e);
      if (e.value != std::nearbyint(e.value) || std::abs(e.value) >= 0x1p53)
        throw RejectedElement("exact-integer aggregation got non-integer value for '" + e.key + "'");
      sums[e.key] += static_cast<std::int64_t>(e.value);
    }
    out.reserve(sums.size());
    for (auto& [k, v] : sums) out.push_back({k, static_cast<double>(v)});
  }
  return FrequencyVector(std::move(out));
}

/// Sum of |w|^q over all but the k largest magnitudes.
inline double tail_norm_pow(std::span<const double> magnitudes, std::size_t k, double q) {
  if (k >= magnitudes.size()) return 0.0;
  std::vector<double> m(magnitudes.begin(), magnitudes.end());
  for (auto& x : m) x = std::abs(x);
  if (k > 0) std::nth_element(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(k - 1), m.end(), std::greater<>());
  // Entries from k on are the tail; add smallest first.
  std::sort(m.begin() + static_cast<std::ptrdiff_t>(k), m.end());
  double s = 0.0;
  for (auto it = m.begin() + static_cast<std::ptrdiff_t>(k); it != m.end(); ++it) s += std::pow(*it, q);
  return s;
}

/// ||tail_k(v)||_q^q
inline double tail_norm(const FrequencyVector& v, std::size_t k, double q) {
  if (q <= 0) throw DomainError("tail_norm requires q > 0");
  auto m = v.magnitudes();
  return tail_norm_pow(m, k, q);
}

/// Keys in decreasing |v|, ties by ascending key bytes; at most k of them.
inline std::vector<std::string> top_k_order(const FrequencyVector& v, std::size_t k) {
  if (k == 0) throw DomainError("top_k_order requires k >= 1");
  std::vector<const FrequencyEntry*> ptrs;
  ptrs.reserve(v.size());
  for (const auto& e : v) ptrs.push_back(&e);
  const std::size_t take = std::min(k, ptrs.size());
  std::partial_sort(ptrs.begin(), ptrs.begin() + static_cast<std::ptrdiff_t>(take), ptrs.end(),
                    [](const FrequencyEntry* a, const FrequencyEntry* b) {
                      const double ma = std::abs(a->value), mb = std::abs(b->value);
                      if (ma != mb) return ma > mb;
                      return a->key < b->key;
                    });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(ptrs[i]->key);
  return out;
}

/// Distribution of the per-key scaling variable r_x.
enum class RDist {
  Exp1,       // p-ppswor
  Uniform01,  // p-priority
};

inline Purpose purpose_of(RDist d) noexcept {
  return d == RDist::Exp1 ? Purpose::TransformExp : Purpose::TransformUniform;
}

/// r_x: a pure function of (key, seed, dist). Never stored.
inline double draw_r(std::string_view key, std::uint64_t seed, RDist dist) noexcept {
  const SeedRand rand(seed, purpose_of(dist));
  return dist == RDist::Exp1 ? rand.exp1(key) : rand.uniform01(key);
}

/// KeyHash: byte string -> [0, n).
inline std::uint64_t key_hash(std::string_view key, std::uint64_t seed, std::uint64_t n) noexcept {
  return SeedRand(seed, Purpose::KeyHash).index(key, n);
}

/// Key-hash domain when none is configured: next power of two >= 4 x distinct keys.
inline std::uint64_t default_keyhash_domain(std::uint64_t distinct_estimate) noexcept {
  return std::bit_ceil(std::max<std::uint64_t>(4 * distinct_estimate, 2));
}

/// The f and L_x of a sum statistic sum_x f(nu_x) L_x.
class StatisticSpec {
 public:
  enum class Kind { identity, power, custom };

  static StatisticSpec identity() { return StatisticSpec(Kind::identity, 1.0, {}, "nu"); }

  // f(nu) = |nu|^exponent, i.e. the frequency moment ||nu||_exponent^exponent.
  static StatisticSpec power(double exponent) {
    if (!(exponent > 0)) throw ConfigError("power statistic needs a positive exponent");
    return StatisticSpec(Kind::power, exponent, {}, "p" + trim_number(exponent));
  }

  static StatisticSpec custom(std::function<double(double)> f, std::string name) {
    if (!f) throw ConfigError("custom statistic needs a function");
    if (f(0.0) != 0.0) throw ConfigError("statistic function must satisfy f(0) = 0");
    return StatisticSpec(Kind::custom, 0.0, std::move(f), std::move(name));
  }

  StatisticSpec with_coefficients(std::map<std::string, double, std::less<>> coefficients) const {
    StatisticSpec s = *this;
    s.coefficients_ = std::move(coefficients);
    return s;
  }

  double f(double nu) const {
    switch (kind_) {
      case Kind::identity: return nu;
      case Kind::power: return std::pow(std::abs(nu), exponent_);
      case Kind::custom: return fn_(nu);
    }
    return 0.0;
  }

  // L_x; all-ones unless coefficients were supplied (then absent keys get 0).
  double coefficient(std::string_view key) const {
    if (!coefficients_) return 1.0;
    auto it = coefficients_->find(key);
    return it == coefficients_->end() ? 0.0 : it->second;
  }

  double exact(const FrequencyVector& v) const {
    double s = 0.0;
    for (const auto& e : v) s += f(e.value) * coefficient(e.key);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  const std::string& name() const noexcept { return name_; }

 private:
  StatisticSpec(Kind kind, double exponent, std::function<double(double)> fn, std::string name)
      : kind_(kind), exponent_(exponent), fn_(std::move(fn)), name_(std::move(name)) {}

  static std::string trim_number(double x) {
    std::string s = std::to_string(x);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  Kind kind_;
  double exponent_;
  std::function<double(double)> fn_;
  std::string name_;
  std::optional<std::map<std::string, double, std::less<>>> coefficients_;
};

}  // namespace worp
