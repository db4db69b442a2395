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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "worp/calibration.hpp"
#include "worp/core.hpp"
#include "worp/element_io.hpp"
#include "worp/estimate.hpp"
#include "worp/parallel.hpp"
#include "worp/pipeline.hpp"
#include "worp/transform.hpp"
#include "worp/tvd.hpp"

namespace worp {

/// nu_i = scale * i^-alpha for ranks i = 1..n; keys are the decimal ranks.
inline FrequencyVector gen_zipf(double alpha, std::uint64_t n, double scale = 1.0) {
  if (!(alpha >= 0.0)) throw ConfigError("zipf: alpha must be >= 0");
  if (n == 0) throw ConfigError("zipf: n must be >= 1");
  std::vector<FrequencyEntry> e;
  e.reserve(n);
  for (std::uint64_t i = 1; i <= n; ++i) e.push_back({std::to_string(i), scale * std::pow(static_cast<double>(i), -alpha)});
  return FrequencyVector(std::move(e));
}

/// One element per key carrying its full frequency.
inline std::vector<Element> as_elements(const FrequencyVector& v) {
  std::vector<Element> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back({e.key, e.value});
  return out;
}

/// Samples with replacement: k i.i.d. draws with Pr[x] proportional to |nu_x|^p.
inline std::vector<std::string> perfect_wr_sample(const FrequencyVector& v, std::size_t k, double p, Rng& rng) {
  std::vector<double> cum;
  cum.reserve(v.size());
  double acc = 0.0;
  for (const auto& e : v) cum.push_back(acc += std::pow(std::abs(e.value), p));
  if (!(acc > 0.0)) throw DomainError("with-replacement sampling needs a nonzero vector");
  std::uniform_real_distribution<double> u(0.0, acc);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u(rng));
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), v.size() - 1);
    out.push_back(v.entries()[idx].key);
  }
  return out;
}

inline std::size_t effective_size(const std::vector<std::string>& draws) {
  return std::set<std::string>(draws.begin(), draws.end()).size();
}

/// Horvitz-Thompson estimate over the distinct keys of a with-replacement
/// sample, with inclusion probability 1 - (1 - mu_x)^k.
inline double wr_estimate(const std::vector<std::string>& draws, const FrequencyVector& v, double p,
                          const StatisticSpec& spec) {
  const double total = v.norm_pow(p);
  const double k = static_cast<double>(draws.size());
  double est = 0.0;
  for (const auto& key : std::set<std::string>(draws.begin(), draws.end())) {
    const double nu = v.at(key);
    const double mu = std::pow(std::abs(nu), p) / total;
    const double pi = -std::expm1(k * std::log1p(-mu));
    est += spec.f(nu) * spec.coefficient(key) / (mu >= 1.0 ? 1.0 : pi);
  }
  return est;
}

/// Estimated rank-frequency curve: each sampled key stands for 1/pi keys.
inline std::vector<std::pair<double, double>> rank_frequency_curve(const WorSample& s) {
  std::vector<std::pair<double, double>> pts;  // (|nu|, weight)
  for (const auto& e : s.entries)
    pts.push_back({std::abs(e.frequency), s.underfull ? 1.0 : 1.0 / inclusion_prob(e.frequency, s.tau, s.p, s.dist)});
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::pair<double, double>> out;
  double rank = 0.0;
  for (const auto& [f, w] : pts) {
    rank += w;
    out.push_back({rank, f});
  }
  return out;
}

enum class Pipeline { perfectWR, perfectWOR, worp1, worp2, tvd };

inline std::string_view to_string(Pipeline p) noexcept {
  switch (p) {
    case Pipeline::perfectWR: return "perfectWR";
    case Pipeline::perfectWOR: return "perfectWOR";
    case Pipeline::worp1: return "worp1";
    case Pipeline::worp2: return "worp2";
    case Pipeline::tvd: return "tvd";
  }
  return "?";
}

inline Pipeline pipeline_from(std::string_view s) {
  for (auto p : {Pipeline::perfectWR, Pipeline::perfectWOR, Pipeline::worp1, Pipeline::worp2, Pipeline::tvd})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown pipeline '" + std::string(s) + "'");
}

struct Scenario {
  std::string distribution = "zipf";  // zipf, uniform or file
  double alpha = 1.0;
  std::uint64_t n = 10000;
  std::string file;  // element file when distribution == "file"
  std::size_t k = 100;
  double p = 1.0;
  int q = 2;
  double epsilon = 1.0 / 3.0;
  std::size_t runs = 100;
  std::uint64_t seed_base = 1;
  std::vector<Pipeline> pipelines{Pipeline::perfectWR, Pipeline::perfectWOR, Pipeline::worp1, Pipeline::worp2};
  std::vector<double> stats{1.0};  // exponents p' of ||nu||_{p'}^{p'}
  std::optional<std::size_t> rows;
  std::optional<std::size_t> width;  // default 31 k
  unsigned threads = 1;

  void validate() const {
    if (runs == 0) throw ConfigError("scenario needs runs >= 1");
    if (k == 0) throw ConfigError("scenario needs k >= 1");
    if (stats.empty()) throw ConfigError("scenario needs at least one statistic");
  }
};

inline FrequencyVector scenario_data(const Scenario& sc) {
  if (sc.distribution == "zipf") return gen_zipf(sc.alpha, sc.n);
  if (sc.distribution == "uniform") return gen_zipf(0.0, sc.n);
  if (sc.distribution == "file") return aggregate(read_elements(sc.file));
  throw ConfigError("unknown distribution '" + sc.distribution + "'");
}

struct RunRow {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  Pipeline pipeline{};
  double stat = 0.0;
  double estimate = 0.0;
  bool failed = false;
  std::size_t sample_size = 0;
};

struct SummaryRow {
  Pipeline pipeline{};
  double stat = 0.0;
  double truth = 0.0;
  double nrmse = 0.0;
  double mean = 0.0;
  std::size_t failures = 0;
};

struct EffectiveRow {
  std::size_t run = 0;
  Pipeline pipeline{};
  std::size_t effective = 0;
  std::size_t actual = 0;
  std::size_t trials = 0;
};

struct CurveRow {
  Pipeline pipeline{};
  double rank = 0.0;
  double frequency = 0.0;
};

struct ScenarioResult {
  std::vector<RunRow> runs;
  std::vector<SummaryRow> summary;
  std::vector<EffectiveRow> effective;
  std::vector<CurveRow> curves;  // run 0 only; pipeline perfectWOR doubles as "true" reference below
  std::vector<std::pair<double, double>> true_curve;
  std::size_t worp2_matches = 0;  // runs where worp2 returned the perfect WOR key set
  std::size_t worp2_runs = 0;
  std::map<std::string, double> seconds;  // wall time per pipeline
  std::size_t sketch_rows = 0, sketch_width = 0, collect_capacity = 0;
};

/// Shared-base oracle sampler for large inputs: draws from the base
/// aggregate and only stores the updates it received afterwards.
class BaseOracleSampler final : public SingleSampler {
 public:
  BaseOracleSampler(const std::vector<double>* cum, double p, std::uint64_t seed) : cum_(cum), p_(p), rng_(seed) {}

  void process(std::uint64_t key, double delta) override { delta_[key] += delta; }

  std::optional<std::uint64_t> finalize() override {
    const auto& cum = *cum_;
    auto base_w = [&](std::uint64_t x) { return cum[x] - (x ? cum[x - 1] : 0.0); };
    double removed = 0.0, added = 0.0;
    std::vector<std::pair<std::uint64_t, double>> touched;
    for (const auto& [x, d] : delta_) {
      const double bw = base_w(x);
      const double nu = std::pow(bw, 1.0 / p_) + d;  // base values are nonnegative
      const double w = std::pow(std::abs(nu), p_);
      removed += bw;
      added += w;
      touched.push_back({x, w});
    }
    const double base_total = cum.back() - removed;
    const double total = base_total + added;
    if (!(total > 1e-300)) return std::nullopt;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) * total < added) {
      std::vector<double> w;
      for (const auto& t : touched) w.push_back(t.second);
      const auto i = detail::draw_proportional(w, rng_);
      return i ? std::optional(touched[*i].first) : std::nullopt;
    }
    std::uniform_real_distribution<double> ub(0.0, cum.back());
    for (int tries = 0; tries < 1 << 20; ++tries) {
      const auto it = std::upper_bound(cum.begin(), cum.end(), ub(rng_));
      const auto x = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size()) - 1));
      if (!delta_.contains(x)) return x;
    }
    return std::nullopt;
  }

 private:
  const std::vector<double>* cum_;
  double p_;
  Rng rng_;
  std::map<std::uint64_t, double> delta_;
};

/// Runs every pipeline of the scenario with paired per-run seeds
/// (seed_base + run) and collects estimates, sizes and timings.
inline ScenarioResult run_scenario(const Scenario& sc, const Calibration* cal2, const Calibration* cal1) {
  sc.validate();
  const FrequencyVector v = scenario_data(sc);
  const auto elems = as_elements(v);
  const SpanSource src(elems);
  std::vector<StatisticSpec> specs;
  std::vector<double> truths;
  for (double e : sc.stats) {
    specs.push_back(StatisticSpec::power(e));
    truths.push_back(specs.back().exact(v));
  }

  // Integer key mapping over the rank domain when keys are ranks; hashed otherwise.
  bool integer_keys = sc.distribution != "file";
  WorpConfig base;
  base.k = sc.k;
  base.p = sc.p;
  base.q = sc.q;
  base.epsilon = sc.epsilon;
  base.keyhash_n = integer_keys ? sc.n + 1 : default_keyhash_domain(v.size());
  base.mapping = integer_keys ? KeyMapping::Integer : KeyMapping::Hashed;
  base.width = sc.width.value_or(31 * sc.k);
  base.rows = sc.rows;
  base.counters = sc.width.value_or(31 * sc.k);
  WorpConfig cfg2 = base, cfg1 = base;
  if (cal2) cfg2.apply(*cal2, 2);
  if (cal1) cfg1.apply(*cal1, 1);

  ScenarioResult res;
  res.sketch_rows = cfg2.rhh().rows();
  res.sketch_width = cfg2.rhh().width();
  res.collect_capacity = cfg2.collect_capacity();
  const std::size_t np = sc.pipelines.size(), ns = specs.size();
  res.runs.resize(sc.runs * np * ns);
  std::vector<EffectiveRow> eff(sc.runs * np);
  std::vector<char> match(sc.runs, 0);
  std::vector<std::vector<double>> secs(sc.runs, std::vector<double>(np, 0.0));
  std::vector<std::vector<CurveRow>> curves(np);

  std::vector<double> cum;
  std::vector<std::pair<std::uint64_t, double>> tvd_stream;
  if (std::find(sc.pipelines.begin(), sc.pipelines.end(), Pipeline::tvd) != sc.pipelines.end()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      cum.push_back(acc += std::pow(std::abs(v.entries()[i].value), sc.p));
      tvd_stream.push_back({i, v.entries()[i].value});
    }
  }

  parallel_for(sc.runs, sc.threads, [&](std::size_t run) {
    const std::uint64_t seed = sc.seed_base + run;
    std::optional<WorSample> perfect;
    for (std::size_t pi = 0; pi < np; ++pi) {
      const Pipeline pl = sc.pipelines[pi];
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<double> ests(ns, 0.0);
      bool failed = false;
      std::size_t size = 0, effective = 0, trials = 0;
      std::optional<WorSample> sample;
      if (pl == Pipeline::perfectWR) {
        Rng rng(task_seed(seed, 0x5752));
        const auto draws = perfect_wr_sample(v, sc.k, sc.p, rng);
        for (std::size_t s = 0; s < ns; ++s) ests[s] = wr_estimate(draws, v, sc.p, specs[s]);
        size = draws.size();
        effective = effective_size(draws);
      } else if (pl == Pipeline::tvd) {
        TvdConfig tc{sc.k, sc.p, v.size(), 8 * sc.k, 1e300};
        std::vector<std::unique_ptr<SingleSampler>> samplers;
        for (std::size_t i = 0; i < tc.samplers(); ++i)
          samplers.push_back(std::make_unique<BaseOracleSampler>(&cum, sc.p, task_seed(seed, 0x7D00 + i)));
        ExactFrequencies R;
        for (const auto& [x, val] : tvd_stream) R.process(x, val);
        const auto r = tvd_sample(std::span<const std::unique_ptr<SingleSampler>>(samplers), R, tc);
        failed = r.failed;
        size = r.keys.size();
        effective = r.keys.size();
        trials = r.trials;
        for (auto& e : ests) e = std::nan("");
      } else {
        WorpConfig c = pl == Pipeline::worp1 ? cfg1 : cfg2;
        c.seed = seed;
        if (pl == Pipeline::perfectWOR)
          sample = exact_bottomk_sample(v, sc.k, c.transform());
        else if (pl == Pipeline::worp2)
          sample = two_pass_sample(src, c);
        else
          sample = one_pass_sample(src, c);
        failed = sample->failed;
        size = sample->size();
        effective = size;
        for (std::size_t s = 0; s < ns; ++s) ests[s] = estimate_statistic(*sample, specs[s]).value;
        if (pl == Pipeline::perfectWOR) perfect = sample;
        if (run == 0)
          for (const auto& [rank, f] : rank_frequency_curve(*sample)) curves[pi].push_back({pl, rank, f});
      }
      if (pl == Pipeline::worp2 && sample) {
        const auto pf = perfect ? *perfect : exact_bottomk_sample(v, sc.k, [&] {
          auto c = cfg2;
          c.seed = seed;
          return c.transform();
        }());
        auto a = sample->keys(), b = pf.keys();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        match[run] = a == b;
      }
      secs[run][pi] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (std::size_t s = 0; s < ns; ++s)
        res.runs[(run * np + pi) * ns + s] = {run, seed, pl, sc.stats[s], ests[s], failed, size};
      eff[run * np + pi] = {run, pl, effective, size, trials};
    }
  });

  for (std::size_t pi = 0; pi < np; ++pi) {
    const Pipeline pl = sc.pipelines[pi];
    double t = 0.0;
    for (std::size_t r = 0; r < sc.runs; ++r) t += secs[r][pi];
    res.seconds[std::string(to_string(pl))] = t;
    res.curves.insert(res.curves.end(), curves[pi].begin(), curves[pi].end());
    if (pl == Pipeline::tvd) {
      SummaryRow row{pl, sc.stats.front(), truths.front(), std::nan(""), std::nan(""), 0};
      for (std::size_t r = 0; r < sc.runs; ++r) row.failures += res.runs[(r * np + pi) * ns].failed;
      res.summary.push_back(row);
      continue;
    }
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<double> e;
      std::size_t fails = 0;
      for (std::size_t r = 0; r < sc.runs; ++r) {
        const auto& row = res.runs[(r * np + pi) * ns + s];
        e.push_back(row.estimate);
        fails += row.failed;
      }
      res.summary.push_back({pl, sc.stats[s], truths[s], nrmse(e, truths[s]), mean_stats(e).mean, fails});
    }
    if (pl == Pipeline::worp2) {
      res.worp2_runs = sc.runs;
      for (char m : match) res.worp2_matches += m;
    }
  }
  res.effective = std::move(eff);
  std::size_t rank = 0;
  std::vector<double> mags = v.magnitudes();
  std::sort(mags.begin(), mags.end(), std::greater<>());
  for (double m : mags) res.true_curve.push_back({static_cast<double>(++rank), m});
  return res;
}

inline void write_summary_csv(std::ostream& os, const Scenario& sc, const ScenarioResult& r) {
  os << "distribution,alpha,n,k,p,q,stat,pipeline,runs,failures,truth,mean_estimate,nrmse\n";
  for (const auto& s : r.summary)
    os << sc.distribution << ',' << format_double(sc.alpha) << ',' << sc.n << ',' << sc.k << ',' << format_double(sc.p)
       << ',' << sc.q << ',' << format_double(s.stat) << ',' << to_string(s.pipeline) << ',' << sc.runs << ','
       << s.failures << ',' << format_double(s.truth) << ',' << format_double(s.mean) << ','
       << format_double(s.nrmse) << '\n';
}

inline void write_runs_csv(std::ostream& os, const ScenarioResult& r) {
  os << "run,seed,pipeline,stat,estimate,failed,sample_size\n";
  for (const auto& x : r.runs)
    os << x.run << ',' << x.seed << ',' << to_string(x.pipeline) << ',' << format_double(x.stat) << ','
       << format_double(x.estimate) << ',' << (x.failed ? 1 : 0) << ',' << x.sample_size << '\n';
}

inline void write_curves_csv(std::ostream& os, const ScenarioResult& r) {
  os << "pipeline,rank,frequency\n";
  for (const auto& [rank, f] : r.true_curve) os << "true," << format_double(rank) << ',' << format_double(f) << '\n';
  for (const auto& c : r.curves)
    os << to_string(c.pipeline) << ',' << format_double(c.rank) << ',' << format_double(c.frequency) << '\n';
}

inline void write_effective_csv(std::ostream& os, const ScenarioResult& r) {
  os << "run,pipeline,effective_size,actual_size,trials\n";
  for (const auto& e : r.effective)
    os << e.run << ',' << to_string(e.pipeline) << ',' << e.effective << ',' << e.actual << ',' << e.trials << '\n';
}

/// Reference NRMSE figures for one moment-estimation setting at n = 10^4, k = 100.
struct ReferenceRow {
  double p;
  double alpha;
  double stat;
  double ref_wr, ref_wor, ref_worp1, ref_worp2;
};

inline std::vector<ReferenceRow> reference_rows() {
  return {{2, 2, 3, 1.16e-04, 2.09e-11, 1.06e-03, 2.08e-11},
          {2, 2, 2, 7.96e-05, 1.26e-07, 1.14e-02, 1.25e-07},
          {1, 2, 1, 9.51e-03, 1.60e-03, 2.79e-02, 1.60e-03},
          {1, 1, 3, 3.59e-01, 5.73e-03, 5.14e-03, 5.72e-03},
          {1, 2, 3, 3.45e-04, 7.34e-10, 5.11e-05, 7.38e-10}};
}

}  // namespace worp
