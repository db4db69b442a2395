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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "worp/core.hpp"
#include "worp/error.hpp"
#include "worp/sample.hpp"

namespace worp {

enum class KeyMapping {
  Hashed,   // KeyHash into [0, n)
  Integer,  // keys are decimal integers already in [0, n)
};

struct TransformConfig {
  double p = 1.0;
  RDist dist = RDist::Exp1;
  std::uint64_t seed = 0;
  std::uint64_t keyhash_n = 1ULL << 20;
  KeyMapping mapping = KeyMapping::Hashed;

  void validate() const {
    if (!(p > 0.0) || p > 2.0) throw ConfigError("transform: p must be in (0, 2]");
    if (keyhash_n == 0) throw ConfigError("transform: key domain must be non-empty");
  }
};

/// r^(1/p), the per-key divisor of the transform.
inline double r_root(double r, double p) noexcept {
  if (p == 1.0) return r;
  if (p == 2.0) return std::sqrt(r);
  return std::pow(r, 1.0 / p);
}

inline double key_scale(std::string_view key, const TransformConfig& cfg) noexcept {
  return r_root(draw_r(key, cfg.seed, cfg.dist), cfg.p);
}

inline std::uint64_t map_key(std::string_view key, const TransformConfig& cfg) {
  if (cfg.mapping == KeyMapping::Hashed) return key_hash(key, cfg.seed, cfg.keyhash_n);
  std::uint64_t out = 0;
  const auto* end = key.data() + key.size();
  const auto [ptr, ec] = std::from_chars(key.data(), end, out);
  if (ec != std::errc() || ptr != end) throw RejectedElement("integer key mapping: '" + std::string(key) + "' is not an integer");
  if (out >= cfg.keyhash_n) throw RejectedElement("integer key mapping: '" + std::string(key) + "' outside [0, n)");
  return out;
}

struct TransformedElement {
  std::uint64_t key = 0;
  double value = 0.0;

  friend bool operator==(const TransformedElement&, const TransformedElement&) = default;
};

/// (key, value) -> (KeyHash(key), value / r_key^(1/p)).
inline TransformedElement transform_element(const Element& e, const TransformConfig& cfg) {
  return {map_key(e.key, cfg), e.value / key_scale(e.key, cfg)};
}

/// Maps an estimate of nu*_x back to an estimate of nu_x.
inline double invert_estimate(double est_out, std::string_view key, const TransformConfig& cfg) noexcept {
  return est_out * key_scale(key, cfg);
}

/// nu*_x for every key of v, same order as v.
inline std::vector<double> transformed_values(const FrequencyVector& v, const TransformConfig& cfg) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(e.value / key_scale(e.key, cfg));
  return out;
}

namespace detail {

// Indices of v ordered by decreasing |star|, ties by ascending key.
inline std::vector<std::size_t> star_order(const FrequencyVector& v, const std::vector<double>& star,
                                           std::size_t take) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  take = std::min(take, idx.size());
  const auto& ent = v.entries();
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(star[a]), mb = std::abs(star[b]);
                      if (ma != mb) return ma > mb;
                      return ent[a].key < ent[b].key;
                    });
  idx.resize(take);
  return idx;
}

}  // namespace detail

/// The ground-truth bottom-k sample of v under cfg's randomization.
inline WorSample exact_bottomk_sample(const FrequencyVector& v, std::size_t k, const TransformConfig& cfg) {
  cfg.validate();
  if (k == 0) throw ConfigError("sample size k must be >= 1");
  if (v.size() < k + 1)
    throw DegenerateInput("exact bottom-k sample needs at least k+1 keys, got " + std::to_string(v.size()));
  const auto star = transformed_values(v, cfg);
  const auto order = detail::star_order(v, star, k + 1);
  WorSample s;
  s.mode = SampleMode::exact2pass;
  s.p = cfg.p;
  s.seed = cfg.seed;
  s.dist = cfg.dist;
  s.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = v.entries()[order[i]];
    s.entries.push_back({e.key, e.value, star[order[i]]});
  }
  s.tau = std::abs(star[order[k]]);
  return s;
}

}  // namespace worp
