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
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "worp/calibration.hpp"
#include "worp/collect.hpp"
#include "worp/core.hpp"
#include "worp/element_io.hpp"
#include "worp/error.hpp"
#include "worp/rhh.hpp"
#include "worp/sample.hpp"
#include "worp/transform.hpp"

namespace worp {

/// Everything a sampling job needs. `k` is the sample size; the sketch is an
/// rHH sketch for k+1 keys.
struct WorpConfig {
  std::size_t k = 100;
  double p = 1.0;
  int q = 2;
  RDist dist = RDist::Exp1;
  std::uint64_t seed = 1;
  std::uint64_t keyhash_n = 1ULL << 20;
  KeyMapping mapping = KeyMapping::Hashed;

  double psi = 0.1;
  double delta = 0.01;
  double epsilon = 1.0 / 3.0;  // one-pass relative accuracy
  std::size_t B = max_B;
  bool half_gate = false;

  std::optional<std::size_t> rows;
  std::optional<std::size_t> width;
  std::optional<std::size_t> counters;

  void validate() const {
    if (k == 0) throw ConfigError("sample size k must be >= 1");
    if (q != 1 && q != 2) throw ConfigError("q must be 1 or 2");
    if (!(p > 0.0) || p > 2.0) throw ConfigError("p must be in (0, 2]");
    if (static_cast<double>(q) < p) throw ConfigError("q must be >= p");
    if (B < 1) throw ConfigError("B must be >= 1");
    if (!(epsilon > 0.0) || epsilon > 1.0 / 3.0 + 1e-12) throw ConfigError("epsilon must be in (0, 1/3]");
  }

  TransformConfig transform() const { return {p, dist, seed, keyhash_n, mapping}; }

  RhhConfig rhh() const {
    RhhConfig c;
    c.k = k + 1;
    c.psi = psi;
    c.delta = delta;
    c.q = q;
    c.n = keyhash_n;
    c.seed = seed;
    c.rows_override = rows;
    c.width_override = width;
    c.capacity_override = counters;
    return c;
  }

  std::size_t collect_capacity() const { return std::max<std::size_t>(B, 1) * (k + 1); }

  /// Fills psi, delta and B from a calibration for (n, k+1, q/p):
  /// psi = Psi / 3^q for two passes and epsilon^q * Psi for one pass.
  void apply(const Calibration& cal, int passes) {
    if (cal.k != k + 1) throw ConfigError("calibration was computed for k = " + std::to_string(cal.k) +
                                          ", expected sample size + 1 = " + std::to_string(k + 1));
    if (std::abs(cal.rho - static_cast<double>(q) / p) > 1e-9)
      throw ConfigError("calibration rho does not match q/p");
    const double scale = passes == 2 ? std::pow(3.0, -q) : std::pow(epsilon, q);
    psi = std::min(1.0, scale * cal.psi);
    delta = cal.delta;
    B = cal.B;
  }
};

namespace detail {

struct Ranked {
  std::string key;
  std::uint64_t mapped;
  double frequency;
  double star;
};

inline void sort_by_star(std::vector<Ranked>& v) {
  std::sort(v.begin(), v.end(), [](const Ranked& a, const Ranked& b) {
    const double ma = std::abs(a.star), mb = std::abs(b.star);
    if (ma != mb) return ma > mb;
    return a.key < b.key;
  });
}

inline WorSample make_sample(const WorpConfig& cfg, SampleMode mode) {
  WorSample s;
  s.mode = mode;
  s.p = cfg.p;
  s.seed = cfg.seed;
  s.dist = cfg.dist;
  return s;
}

// Top k of `ranked` (already sorted) with tau the (k+1)-st magnitude.
inline void fill_bottomk(WorSample& s, const std::vector<Ranked>& ranked, std::size_t k, bool complete) {
  if (ranked.size() <= k) {
    for (const auto& r : ranked) s.entries.push_back({r.key, r.frequency, r.star});
    s.tau = 0.0;
    if (complete)
      s.underfull = true;
    else
      s.failed = true;
    return;
  }
  for (std::size_t i = 0; i < k; ++i) s.entries.push_back({ranked[i].key, ranked[i].frequency, ranked[i].star});
  s.tau = std::abs(ranked[k].star);
}

}  // namespace detail

/// Two-pass sampling. Pass one builds an rHH sketch of the transformed
/// stream; pass two collects exact frequencies of the keys with the largest
/// sketch estimates. Every stage is a mergeable state, so a job can be split
/// across workers: build sketches per shard and merge, then collect per
/// shard with the merged sketch and merge the collectors.
template <RhhSketch Sketch>
class TwoPassWorp {
 public:
  explicit TwoPassWorp(WorpConfig cfg) : cfg_(std::move(cfg)), tcfg_(cfg_.transform()) {
    cfg_.validate();
    tcfg_.validate();
    if (Sketch::q_norm != cfg_.q) throw ConfigError("sketch flavor does not match q");
  }

  const WorpConfig& config() const noexcept { return cfg_; }

  Sketch make_sketch() const { return Sketch(cfg_.rhh()); }
  CollectT make_collector() const { return CollectT(cfg_.collect_capacity(), cfg_.k, cfg_.half_gate); }

  void pass1(Sketch& sketch, const Element& e) const {
    validate_element(e);
    const auto t = transform_element(e, tcfg_);
    sketch.process(t.key, t.value);
  }

  void pass2(CollectT& t, const Sketch& sketch, const Element& e) const {
    validate_element(e);
    t.process(e.key, e.value, [&] {
      const std::uint64_t m = map_key(e.key, tcfg_);
      return std::pair{std::abs(sketch.est(m)), m};
    });
  }

  /// Exact nu* of every collected key, ranked.
  std::vector<detail::Ranked> ranked(const CollectT& t) const {
    std::vector<detail::Ranked> out;
    for (const auto& e : t.entries()) {
      if (e.exact == 0.0) continue;
      out.push_back({e.key, e.mapped, e.exact, e.exact / key_scale(e.key, tcfg_)});
    }
    detail::sort_by_star(out);
    return out;
  }

  WorSample finalize(const Sketch& sketch, const CollectT& t) const {
    WorSample s = detail::make_sample(cfg_, SampleMode::exact2pass);
    const auto r = ranked(t);
    detail::fill_bottomk(s, r, cfg_.k, !t.dropped());
    if (!s.underfull && !s.failed) s.failed = sketch_failed(sketch, t);
    return s;
  }

  /// A sample of k' >= k keys: every collected key whose exact nu* is at
  /// least L + nu*_(k+1)/3, with L the smallest collected priority. The
  /// smallest qualifying key supplies the threshold. Falls back to the
  /// size-k sample when fewer than k+1 keys qualify.
  WorSample extended_sample(const Sketch& sketch, const CollectT& t) const {
    const auto r = ranked(t);
    if (r.size() <= cfg_.k) return finalize(sketch, t);
    if (!t.dropped()) {
      // Every key of the input was collected, so all of them qualify.
      WorSample s = detail::make_sample(cfg_, SampleMode::exact2pass);
      detail::fill_bottomk(s, r, r.size() - 1, true);
      return s;
    }
    const double cut = t.min_priority() + std::abs(r[cfg_.k].star) / 3.0;
    std::size_t qualifying = 0;
    while (qualifying < r.size() && std::abs(r[qualifying].star) >= cut) ++qualifying;
    if (qualifying < cfg_.k + 1) return finalize(sketch, t);
    WorSample s = detail::make_sample(cfg_, SampleMode::exact2pass);
    detail::fill_bottomk(s, r, qualifying - 1, false);
    s.failed = sketch_failed(sketch, t);
    return s;
  }

  template <ElementSource Src>
  WorSample run(const Src& src) const {
    Sketch sketch = make_sketch();
    src.for_each([&](const Element& e) { pass1(sketch, e); });
    CollectT t = make_collector();
    src.for_each([&](const Element& e) { pass2(t, sketch, e); });
    return finalize(sketch, t);
  }

 private:
  bool sketch_failed(const Sketch& sketch, const CollectT& t) const {
    std::vector<std::uint64_t> cand;
    for (const auto& e : t.entries()) cand.push_back(e.mapped);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    return failure_test(sketch, cfg_.k + 1, std::span<const std::uint64_t>(cand));
  }

  WorpConfig cfg_;
  TransformConfig tcfg_;
};

/// Keys with the largest current estimates seen by a one-pass job. The
/// sketch alone cannot enumerate string keys, so candidates are tracked
/// alongside it and re-ranked against the final sketch.
class CandidateTracker {
 public:
  explicit CandidateTracker(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("candidate tracker capacity must be >= 1");
  }

  std::size_t size() const noexcept { return slots_.size(); }
  bool dropped() const noexcept { return dropped_; }

  void offer(const std::string& key, std::uint64_t mapped, double priority) {
    if (auto it = slots_.find(key); it != slots_.end()) {
      order_.erase({it->second.priority, key});
      it->second.priority = priority;
      order_.insert({priority, key});
      return;
    }
    if (slots_.size() == capacity_) {
      const auto& w = *order_.begin();
      if (priority < w.first || (priority == w.first && key > w.second)) {
        dropped_ = true;
        return;
      }
      slots_.erase(w.second);
      order_.erase(order_.begin());
      dropped_ = true;
    }
    slots_.emplace(key, Slot{mapped, priority});
    order_.insert({priority, key});
  }

  template <class EstFn>
  void rerank(EstFn&& est) {
    std::vector<std::tuple<std::string, std::uint64_t, double>> all;
    for (const auto& [k, s] : slots_) all.emplace_back(k, s.mapped, std::abs(est(s.mapped)));
    slots_.clear();
    order_.clear();
    for (auto& [k, m, pr] : all) offer(k, m, pr);
  }

  template <class EstFn>
  void merge(const CandidateTracker& o, EstFn&& est) {
    if (o.capacity_ != capacity_) throw MergeError("candidate trackers have different capacities");
    dropped_ = dropped_ || o.dropped_;
    std::vector<std::pair<std::string, std::uint64_t>> all;
    for (const auto& [k, s] : slots_) all.emplace_back(k, s.mapped);
    for (const auto& [k, s] : o.slots_)
      if (!slots_.contains(k)) all.emplace_back(k, s.mapped);
    std::sort(all.begin(), all.end());
    slots_.clear();
    order_.clear();
    for (auto& [k, m] : all) offer(k, m, std::abs(est(m)));
  }

  std::vector<std::pair<std::string, std::uint64_t>> keys() const {
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& [k, s] : slots_) out.emplace_back(k, s.mapped);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Slot {
    std::uint64_t mapped;
    double priority;
  };
  std::size_t capacity_;
  bool dropped_ = false;
  std::unordered_map<std::string, Slot> slots_;
  // Ascending (priority, key); among equal priorities the larger key is evicted first.
  struct Worse {
    bool operator()(const std::pair<double, std::string>& a, const std::pair<double, std::string>& b) const {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    }
  };
  std::set<std::pair<double, std::string>, Worse> order_;
};

/// One-pass sampling: the sample is the top k keys by estimated nu*, with
/// frequencies recovered as est * r^(1/p) and tau the (k+1)-st estimate.
template <RhhSketch Sketch>
class OnePassWorp {
 public:
  struct State {
    Sketch sketch;
    CandidateTracker tracker;
  };

  explicit OnePassWorp(WorpConfig cfg) : cfg_(std::move(cfg)), tcfg_(cfg_.transform()) {
    cfg_.validate();
    tcfg_.validate();
    if (Sketch::q_norm != cfg_.q) throw ConfigError("sketch flavor does not match q");
  }

  const WorpConfig& config() const noexcept { return cfg_; }

  State make_state() const { return {Sketch(cfg_.rhh()), CandidateTracker(cfg_.collect_capacity())}; }

  void process(State& st, const Element& e) const {
    validate_element(e);
    const auto t = transform_element(e, tcfg_);
    st.sketch.process(t.key, t.value);
    st.tracker.offer(e.key, t.key, std::abs(st.sketch.est(t.key)));
  }

  void merge(State& a, const State& b) const {
    a.sketch.merge(b.sketch);
    a.tracker.merge(b.tracker, [&](std::uint64_t m) { return a.sketch.est(m); });
  }

  WorSample finalize(const State& st) const {
    std::vector<detail::Ranked> r;
    for (const auto& [key, mapped] : st.tracker.keys()) {
      const double est = st.sketch.est(mapped);
      if (est == 0.0) continue;
      r.push_back({key, mapped, invert_estimate(est, key, tcfg_), est});
    }
    detail::sort_by_star(r);
    WorSample s = detail::make_sample(cfg_, SampleMode::approx1pass);
    detail::fill_bottomk(s, r, cfg_.k, !st.tracker.dropped());
    if (!s.underfull && !s.failed) {
      std::vector<std::uint64_t> cand;
      for (const auto& x : r) cand.push_back(x.mapped);
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      s.failed = failure_test(st.sketch, cfg_.k + 1, std::span<const std::uint64_t>(cand));
    }
    return s;
  }

  template <ElementSource Src>
  WorSample run(const Src& src) const {
    State st = make_state();
    src.for_each([&](const Element& e) { process(st, e); });
    return finalize(st);
  }

 private:
  WorpConfig cfg_;
  TransformConfig tcfg_;
};

using DefaultProjection = ProjectionSketch<FixedCell>;

/// Two-pass sample with the sketch flavor chosen by q.
template <ElementSource Src>
WorSample two_pass_sample(const Src& src, const WorpConfig& cfg) {
  if (cfg.q == 2) return TwoPassWorp<DefaultProjection>(cfg).run(src);
  return TwoPassWorp<CounterSketch>(cfg).run(src);
}

/// One-pass sample with the sketch flavor chosen by q.
template <ElementSource Src>
WorSample one_pass_sample(const Src& src, const WorpConfig& cfg) {
  if (cfg.q == 2) return OnePassWorp<DefaultProjection>(cfg).run(src);
  return OnePassWorp<CounterSketch>(cfg).run(src);
}

}  // namespace worp
