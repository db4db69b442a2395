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
#include <concepts>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "worp/accumulator.hpp"
#include "worp/error.hpp"
#include "worp/hash.hpp"

namespace worp {

/// Parameters shared by both sketch flavors.
struct RhhConfig {
  std::size_t k = 1;
  double psi = 1.0;
  double delta = 0.01;
  int q = 2;
  std::uint64_t n = 1;  // key domain [0, n)
  std::uint64_t seed = 0;

  double c_rows = 4.0;
  double c_width = 6.0;
  double c_counters = 4.0;
  std::optional<std::size_t> rows_override;
  std::optional<std::size_t> width_override;
  std::optional<std::size_t> capacity_override;

  void validate() const {
    if (k == 0) throw ConfigError("rhh: k must be >= 1");
    if (!(psi > 0.0) || psi > 1.0) throw ConfigError("rhh: psi must be in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("rhh: delta must be in (0, 1)");
    if (q != 1 && q != 2) throw ConfigError("rhh: q must be 1 or 2");
    if (n == 0) throw ConfigError("rhh: key domain must be non-empty");
    if (rows_override && *rows_override == 0) throw ConfigError("rhh: rows must be >= 1");
    if (width_override && *width_override == 0) throw ConfigError("rhh: width must be >= 1");
    if (capacity_override && *capacity_override == 0) throw ConfigError("rhh: capacity must be >= 1");
  }

  std::size_t rows() const {
    if (rows_override) return *rows_override;
    const double r = std::ceil(c_rows * std::log(static_cast<double>(n) / delta));
    return static_cast<std::size_t>(std::max(1.0, r));
  }
  std::size_t width() const {
    if (width_override) return *width_override;
    return static_cast<std::size_t>(std::ceil(c_width * static_cast<double>(k) / psi));
  }
  std::size_t capacity() const {
    if (capacity_override) return *capacity_override;
    return static_cast<std::size_t>(std::ceil(c_counters * static_cast<double>(k) / psi));
  }

  // Two sketches are mergeable iff their shapes and randomization agree.
  bool compatible(const RhhConfig& o) const noexcept {
    return k == o.k && psi == o.psi && delta == o.delta && q == o.q && n == o.n && seed == o.seed &&
           c_rows == o.c_rows && c_width == o.c_width && c_counters == o.c_counters &&
           rows_override == o.rows_override && width_override == o.width_override &&
           capacity_override == o.capacity_override;
  }
};

/// CountSketch over keys in [0, n): signed updates, l2 guarantee.
template <SketchCell Cell = FixedCell>
class ProjectionSketch {
 public:
  using cell_type = Cell;
  static constexpr int q_norm = 2;

  explicit ProjectionSketch(const RhhConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.q != 2) throw ConfigError("projection sketch requires q = 2");
    rows_ = cfg_.rows();
    width_ = cfg_.width();
    const SeedRand rand(cfg_.seed, Purpose::SketchRow);
    row_seeds_.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) row_seeds_.push_back(rand.bits(static_cast<std::uint64_t>(r)));
    table_.assign(rows_ * width_, Cell{});
  }

  const RhhConfig& config() const noexcept { return cfg_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const Cell> table() const noexcept { return table_; }
  std::span<Cell> mutable_table() noexcept { return table_; }

  void process(std::uint64_t key, double value) {
    check_key(key);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto [bucket, negative] = locate(r, key);
      table_[r * width_ + bucket].add(negative ? -value : value);
    }
  }

  double est(std::uint64_t key) const {
    check_key(key);
    double buf[128];
    std::vector<double> heap;
    double* vals = buf;
    if (rows_ > 128) {
      heap.resize(rows_);
      vals = heap.data();
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto [bucket, negative] = locate(r, key);
      const double c = table_[r * width_ + bucket].get();
      vals[r] = negative ? -c : c;
    }
    const std::size_t mid = (rows_ - 1) / 2;
    std::nth_element(vals, vals + mid, vals + rows_);
    return vals[mid];
  }

  // Median over rows of the row's sum of squared cells: an estimate of ||v||_2^2.
  double moment_estimate() const {
    std::vector<double> f2(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t b = 0; b < width_; ++b) {
        const double c = table_[r * width_ + b].get();
        f2[r] += c * c;
      }
    const std::size_t mid = (rows_ - 1) / 2;
    std::nth_element(f2.begin(), f2.begin() + static_cast<std::ptrdiff_t>(mid), f2.end());
    return f2[mid];
  }

  void merge(const ProjectionSketch& o) {
    if (!cfg_.compatible(o.cfg_)) throw MergeError("projection sketch: configuration or seed mismatch");
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i].merge(o.table_[i]);
  }

  friend bool operator==(const ProjectionSketch& a, const ProjectionSketch& b) {
    return a.cfg_.compatible(b.cfg_) && a.table_ == b.table_;
  }

 private:
  std::pair<std::size_t, bool> locate(std::size_t row, std::uint64_t key) const noexcept {
    const std::uint64_t h = hash_u64(key, row_seeds_[row]);
    return {static_cast<std::size_t>(fast_range(h, width_)), (h & 1u) != 0};
  }

  void check_key(std::uint64_t key) const {
    if (key >= cfg_.n) throw DomainError("projection sketch: key outside [0, n)");
  }

  RhhConfig cfg_;
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint64_t> row_seeds_;
  std::vector<Cell> table_;
};

/// Space-Saving counters: positive updates, deterministic l1 guarantee.
class CounterSketch {
 public:
  static constexpr int q_norm = 1;

  struct Counter {
    double count = 0.0;
    double error = 0.0;  // count - error <= true frequency <= count
    friend bool operator==(const Counter&, const Counter&) = default;
  };

  explicit CounterSketch(const RhhConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.q != 1) throw ConfigError("counter sketch requires q = 1");
    capacity_ = cfg_.capacity();
  }

  const RhhConfig& config() const noexcept { return cfg_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return counters_.size(); }
  double total() const noexcept { return total_; }

  void process(std::uint64_t key, double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw RejectedElement("counter sketch accepts only finite non-negative updates");
    if (key >= cfg_.n) throw DomainError("counter sketch: key outside [0, n)");
    if (value == 0.0) return;
    total_ += value;
    if (auto it = counters_.find(key); it != counters_.end()) {
      order_.erase({it->second.count, key});
      it->second.count += value;
      order_.insert({it->second.count, key});
      return;
    }
    if (counters_.size() < capacity_) {
      counters_.emplace(key, Counter{value, 0.0});
      order_.insert({value, key});
      return;
    }
    const auto [min_count, min_key] = *order_.begin();
    order_.erase(order_.begin());
    counters_.erase(min_key);
    counters_.emplace(key, Counter{min_count + value, min_count});
    order_.insert({min_count + value, key});
  }

  double est(std::uint64_t key) const {
    auto it = counters_.find(key);
    return it == counters_.end() ? 0.0 : it->second.count;
  }

  std::optional<Counter> counter(std::uint64_t key) const {
    auto it = counters_.find(key);
    if (it == counters_.end()) return std::nullopt;
    return it->second;
  }

  // Smallest stored count when full; otherwise 0. Bounds the frequency of any
  // key that is not stored.
  double floor_count() const noexcept {
    return counters_.size() < capacity_ || order_.empty() ? 0.0 : order_.begin()->first;
  }

  double moment_estimate() const noexcept { return total_; }

  std::vector<std::uint64_t> keys() const {
    std::vector<std::uint64_t> out;
    out.reserve(counters_.size());
    for (const auto& [k, c] : counters_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Mergeable-summary union: a key missing from one side is charged that
  // side's floor as both count and error, then the largest m counts are kept.
  void merge(const CounterSketch& o) {
    if (!cfg_.compatible(o.cfg_)) throw MergeError("counter sketch: configuration or seed mismatch");
    const double fa = floor_count();
    const double fb = o.floor_count();
    std::unordered_map<std::uint64_t, Counter> merged;
    merged.reserve(counters_.size() + o.counters_.size());
    for (const auto& [k, c] : counters_) {
      auto it = o.counters_.find(k);
      if (it != o.counters_.end())
        merged[k] = {c.count + it->second.count, c.error + it->second.error};
      else
        merged[k] = {c.count + fb, c.error + fb};
    }
    for (const auto& [k, c] : o.counters_)
      if (!counters_.contains(k)) merged[k] = {c.count + fa, c.error + fa};

    std::vector<std::pair<double, std::uint64_t>> ranked;
    ranked.reserve(merged.size());
    for (const auto& [k, c] : merged) ranked.push_back({c.count, k});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() > capacity_) ranked.resize(capacity_);

    counters_.clear();
    order_.clear();
    for (const auto& [count, k] : ranked) {
      counters_.emplace(k, merged[k]);
      order_.insert({count, k});
    }
    total_ += o.total_;
  }

  friend bool operator==(const CounterSketch& a, const CounterSketch& b) {
    return a.cfg_.compatible(b.cfg_) && a.counters_ == b.counters_ && a.total_ == b.total_;
  }

  // Rebuilds a sketch from serialized parts.
  static CounterSketch restore(const RhhConfig& cfg, std::span<const std::pair<std::uint64_t, Counter>> entries,
                               double total) {
    CounterSketch s(cfg);
    if (entries.size() > s.capacity_) throw FormatError("counter sketch: more entries than capacity");
    for (const auto& [k, c] : entries) {
      if (k >= cfg.n) throw FormatError("counter sketch: key outside domain");
      if (!s.counters_.emplace(k, c).second) throw FormatError("counter sketch: duplicate key");
      s.order_.insert({c.count, k});
    }
    s.total_ = total;
    return s;
  }

 private:
  RhhConfig cfg_;
  std::size_t capacity_ = 0;
  std::unordered_map<std::uint64_t, Counter> counters_;
  std::set<std::pair<double, std::uint64_t>> order_;
  double total_ = 0.0;
};

template <class S>
concept RhhSketch = requires(S s, const S& cs, std::uint64_t key, double v) {
  { S::q_norm } -> std::convertible_to<int>;
  s.process(key, v);
  { cs.est(key) } -> std::convertible_to<double>;
  { cs.moment_estimate() } -> std::convertible_to<double>;
  { cs.config() } -> std::convertible_to<const RhhConfig&>;
  s.merge(cs);
};

/// Declares failure when the k largest estimates among `candidates` are not
/// heavy relative to the estimated residual mass: some |est|^q among the top k
/// is below (psi/k) * (F - sum of the top-k |est|^q), or fewer than k
/// candidates have a nonzero estimate.
template <RhhSketch S>
bool failure_test(const S& sketch, std::size_t k, std::span<const std::uint64_t> candidates) {
  if (k == 0) throw DomainError("failure_test requires k >= 1");
  const int q = S::q_norm;
  std::vector<double> mags;
  mags.reserve(candidates.size());
  for (std::uint64_t key : candidates) {
    const double e = std::abs(sketch.est(key));
    if (e > 0.0) mags.push_back(q == 2 ? e * e : e);
  }
  if (mags.size() < k) return true;
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k - 1), mags.end(), std::greater<>());
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) top += mags[i];
  const double kth = *std::min_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k));
  const double residual = std::max(0.0, sketch.moment_estimate() - top);
  return kth < sketch.config().psi / static_cast<double>(k) * residual;
}

/// Counter sketches know their own candidates.
inline bool failure_test(const CounterSketch& sketch, std::size_t k) {
  const auto keys = sketch.keys();
  return failure_test(sketch, k, std::span<const std::uint64_t>(keys));
}

/// Projection sketches over a small domain: every key is a candidate.
template <SketchCell Cell>
bool failure_test(const ProjectionSketch<Cell>& sketch, std::size_t k) {
  const std::uint64_t n = sketch.config().n;
  if (n > (1ULL << 24)) throw DomainError("failure_test: domain too large to enumerate; pass candidates");
  std::vector<std::uint64_t> all(n);
  for (std::uint64_t i = 0; i < n; ++i) all[i] = i;
  return failure_test(sketch, k, std::span<const std::uint64_t>(all));
}

}  // namespace worp
