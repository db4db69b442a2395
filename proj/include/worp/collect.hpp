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

#include <cstdint>
#include <iterator>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "worp/error.hpp"

namespace worp {

/// Pass-two collection structure: keeps the keys with the largest frozen
/// priorities and sums their exact values.
///
/// The stored set is always G(seen) = the top `capacity` keys by priority,
/// optionally restricted (beyond the first k+1) to keys whose priority is at
/// least half the (k+1)-st priority. G is monotone, so a key that ends up
/// stored was stored since its first occurrence and its sum is exact, and
/// merging two structures equals collecting over the concatenated input.
class CollectT {
 public:
  struct Entry {
    std::string key;
    std::uint64_t mapped = 0;  // key in the sketch domain
    double priority = 0.0;
    double exact = 0.0;
  };

  CollectT(std::size_t capacity, std::size_t k, bool half_gate = false)
      : capacity_(capacity), top_size_(k + 1), half_gate_(half_gate) {
    if (k == 0) throw ConfigError("collect: k must be >= 1");
    if (capacity_ < top_size_) throw ConfigError("collect: capacity must be at least k+1");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool half_gate() const noexcept { return half_gate_; }
  // True once any key has been refused or evicted.
  bool dropped() const noexcept { return dropped_; }
  bool contains(std::string_view key) const { return slots_.contains(std::string(key)); }

  /// Accumulates value if key is stored; otherwise calls priority_of() and
  /// admits the key if it ranks into G.
  template <class PriorityFn>
  void process(std::string_view key, double value, PriorityFn&& priority_of) {
    const std::string k(key);
    if (auto it = slots_.find(k); it != slots_.end()) {
      it->second.exact += value;
      return;
    }
    const auto [priority, mapped] = priority_of();
    offer(k, mapped, priority, value);
  }

  void merge(const CollectT& o) {
    if (o.capacity_ != capacity_ || o.top_size_ != top_size_ || o.half_gate_ != half_gate_)
      throw MergeError("collect: structures have different shapes");
    for (const auto& [key, slot] : o.slots_) {
      if (auto it = slots_.find(key); it != slots_.end()) {
        if (it->second.priority != slot.priority) throw MergeError("collect: priorities differ; sketches not frozen");
        it->second.exact += slot.exact;
      } else {
        offer(key, slot.mapped, slot.priority, slot.exact);
      }
    }
    dropped_ = dropped_ || o.dropped_;
  }

  /// Stored entries ordered by decreasing priority, ties by ascending key.
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(slots_.size());
    for (const auto* set : {&top_, &rest_})
      for (const Rank& r : *set) {
        const auto& s = slots_.at(*r.key);
        out.push_back({*r.key, s.mapped, s.priority, s.exact});
      }
    return out;
  }

  double min_priority() const {
    if (slots_.empty()) return 0.0;
    return worst().priority;
  }

 private:
  struct Slot {
    std::uint64_t mapped;
    double priority;
    double exact;
  };
  struct Rank {
    double priority;
    const std::string* key;
  };
  struct Better {
    bool operator()(const Rank& a, const Rank& b) const noexcept {
      if (a.priority != b.priority) return a.priority > b.priority;
      return *a.key < *b.key;
    }
  };

  const Rank& worst() const { return rest_.empty() ? *top_.rbegin() : *rest_.rbegin(); }

  bool gate_active() const noexcept { return half_gate_ && top_.size() == top_size_; }
  double gate() const { return 0.5 * top_.rbegin()->priority; }

  void offer(const std::string& key, std::uint64_t mapped, double priority, double exact) {
    if (slots_.size() == capacity_) {
      const Rank& w = worst();
      if (!Better{}(Rank{priority, &key}, w)) {
        dropped_ = true;
        return;
      }
    }
    if (gate_active() && priority < gate() && !Better{}(Rank{priority, &key}, *top_.rbegin())) {
      dropped_ = true;
      return;
    }
    auto [it, _] = slots_.emplace(key, Slot{mapped, priority, exact});
    top_.insert(Rank{priority, &it->first});
    if (top_.size() > top_size_) {
      auto last = std::prev(top_.end());
      rest_.insert(*last);
      top_.erase(last);
    }
    prune();
  }

  void erase_worst_rest() {
    auto last = std::prev(rest_.end());
    const std::string key = *last->key;
    rest_.erase(last);
    slots_.erase(key);
    dropped_ = true;
  }

  void prune() {
    if (gate_active()) {
      const double g = gate();
      while (!rest_.empty() && rest_.rbegin()->priority < g) erase_worst_rest();
    }
    while (slots_.size() > capacity_) erase_worst_rest();
  }

  std::size_t capacity_;
  std::size_t top_size_;
  bool half_gate_;
  bool dropped_ = false;
  std::unordered_map<std::string, Slot> slots_;
  std::set<Rank, Better> top_;
  std::set<Rank, Better> rest_;
};

}  // namespace worp
