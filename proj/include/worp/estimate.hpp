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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "worp/core.hpp"
#include "worp/error.hpp"
#include "worp/sample.hpp"

namespace worp {

/// Probability that a key with frequency nu enters a bottom-k sample with
/// threshold tau, conditioned on the other keys' randomization.
inline double inclusion_prob(double nu, double tau, double p, RDist dist = RDist::Exp1) {
  if (!(tau > 0.0)) throw DomainError("inclusion probability needs a positive threshold");
  const double x = std::pow(std::abs(nu) / tau, p);
  return dist == RDist::Exp1 ? -std::expm1(-x) : std::min(1.0, x);
}

struct Estimate {
  double value = 0.0;
  std::map<std::string, double> contributions;
  bool mode_matched = true;  // frequencies and threshold came from the sample's own mode
};

/// Inverse-probability estimate of sum_x f(nu_x) L_x. Exact samples use the
/// exact nu_x and tau; one-pass samples plug in their estimated nu'_x and
/// estimated tau. Underfull samples hold every key, so the sum is exact.
inline Estimate estimate_statistic(const WorSample& s, const StatisticSpec& spec) {
  Estimate out;
  out.mode_matched = true;
  for (const auto& e : s.entries) {
    const double f = spec.f(e.frequency);
    if (!std::isfinite(f)) throw EvaluationError("statistic is not finite at frequency of key '" + e.key + "'");
    const double l = spec.coefficient(e.key);
    double c = f * l;
    if (!s.underfull && c != 0.0) c /= inclusion_prob(e.frequency, s.tau, s.p, s.dist);
    out.contributions[e.key] = c;
    out.value += c;
  }
  return out;
}

/// Per-key inverse-probability estimate of f(nu_x); 0 when x is not sampled.
inline double per_key_estimate(const WorSample& s, std::string_view key, const StatisticSpec& spec) {
  for (const auto& e : s.entries)
    if (e.key == key) {
      const double f = spec.f(e.frequency);
      return s.underfull ? f : f / inclusion_prob(e.frequency, s.tau, s.p, s.dist);
    }
  return 0.0;
}

/// sqrt(mean squared error) / |truth|.
inline double nrmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw DomainError("nrmse needs at least one estimate");
  if (truth == 0.0) throw DomainError("nrmse needs a nonzero true value");
  double se = 0.0;
  for (double e : estimates) se += (e - truth) * (e - truth);
  return std::sqrt(se / static_cast<double>(estimates.size())) / std::abs(truth);
}

struct MeanStats {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  double se = 0.0;   // standard error of the mean
};

inline MeanStats mean_stats(std::span<const double> xs) {
  MeanStats m;
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= n;
  if (xs.size() > 1) {
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= n - 1.0;
  }
  m.se = std::sqrt(m.var / n);
  return m;
}

struct VarianceRow {
  std::string key;
  double weight = 0.0;  // w_x = |nu_x|^p
  double empirical_var = 0.0;
  double conditional_var = 0.0;  // mean over runs of w_x^2 (1 - pi) / pi at the run's threshold for x
  double conditional_se = 0.0;
  double bound = 0.0;       // w_x ||w||_1 / (k - 1)
  double tail_bound = 0.0;  // w_x ||tail_k(w)||_1 / (k - 1)
  bool within = true;
};

struct VarianceReport {
  std::vector<VarianceRow> rows;
  double sum_var = 0.0;  // conditional
  double sum_se = 0.0;
  double sum_bound = 0.0;  // ||w||_1^2 / (k - 1)
  bool per_key_ok = true;
  bool sum_ok = true;
  double max_ratio = 0.0;            // max conditional_var / bound
  double max_empirical_ratio = 0.0;  // max empirical_var / bound (descriptive, noisy)
  double max_tail_ratio = 0.0;       // max conditional_var / tail_bound (descriptive)
};

/// Checks Var[w_x estimate] <= w_x ||w||_1 / (k-1) for every key over many
/// exact-mode samples of size k, where w = |nu|^p is the sampling weight.
///
/// Given the other keys' randomness, x is kept with probability pi and then
/// estimated as w_x / pi, so its conditional variance is w_x^2 (1 - pi) / pi.
/// Averaging that over runs estimates the same variance as the raw spread of
/// the estimates with far less noise, because a rarely sampled key's raw
/// estimates are mostly zero with occasional large values. Each run fixes the
/// threshold for x: tau when x is sampled, the smallest sampled nu* otherwise.
/// A key passes when the conditional variance is within 3 standard errors of
/// the bound.
inline VarianceReport variance_bound_check(std::span<const WorSample> runs, const FrequencyVector& v, double p,
                                           std::size_t k) {
  if (runs.size() < 2) throw DomainError("variance check needs at least two runs");
  if (k < 2) throw DomainError("variance bound requires k >= 2");
  VarianceReport rep;
  std::vector<double> w;
  for (const auto& e : v) w.push_back(std::pow(std::abs(e.value), p));
  double w1 = 0.0;
  for (double x : w) w1 += x;
  const double tail = tail_norm_pow(w, k, 1.0);
  const auto spec = StatisticSpec::power(p);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < v.size(); ++i) index[v.entries()[i].key] = i;
  std::vector<std::vector<double>> est(v.size(), std::vector<double>(runs.size(), 0.0));
  std::vector<std::vector<double>> cond(v.size(), std::vector<double>(runs.size(), 0.0));
  std::vector<double> run_sum(runs.size(), 0.0);
  std::vector<char> sampled(v.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& s = runs[r];
    if (s.mode != SampleMode::exact2pass) throw DomainError("variance check needs exact-mode samples");
    if (s.underfull) {
      for (const auto& e : s.entries)
        if (auto it = index.find(e.key); it != index.end()) est[it->second][r] = spec.f(e.frequency);
      continue;
    }
    if (s.size() != k) throw DomainError("variance check needs samples of size k");
    std::fill(sampled.begin(), sampled.end(), 0);
    for (const auto& e : s.entries) {
      auto it = index.find(e.key);
      if (it == index.end()) continue;
      sampled[it->second] = 1;
      est[it->second][r] = spec.f(e.frequency) / inclusion_prob(e.frequency, s.tau, s.p, s.dist);
    }
    const double kth = std::abs(s.entries.back().transformed);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double pi = inclusion_prob(v.entries()[i].value, sampled[i] ? s.tau : kth, s.p, s.dist);
      cond[i][r] = w[i] * w[i] * (1.0 - pi) / pi;
      run_sum[r] += cond[i][r];
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto ms = mean_stats(est[i]);
    const auto mc = mean_stats(cond[i]);
    VarianceRow row;
    row.key = v.entries()[i].key;
    row.weight = w[i];
    row.empirical_var = ms.var;
    row.conditional_var = mc.mean;
    row.conditional_se = mc.se;
    row.bound = row.weight * w1 / static_cast<double>(k - 1);
    row.tail_bound = row.weight * tail / static_cast<double>(k - 1);
    row.within = row.conditional_var <= row.bound + 3.0 * row.conditional_se;
    rep.per_key_ok = rep.per_key_ok && row.within;
    if (row.bound > 0) {
      rep.max_ratio = std::max(rep.max_ratio, row.conditional_var / row.bound);
      rep.max_empirical_ratio = std::max(rep.max_empirical_ratio, row.empirical_var / row.bound);
    }
    if (row.tail_bound > 0) rep.max_tail_ratio = std::max(rep.max_tail_ratio, row.conditional_var / row.tail_bound);
    rep.rows.push_back(std::move(row));
  }
  const auto total = mean_stats(run_sum);
  rep.sum_var = total.mean;
  rep.sum_se = total.se;
  rep.sum_bound = w1 * w1 / static_cast<double>(k - 1);
  rep.sum_ok = rep.sum_var <= rep.sum_bound + 3.0 * rep.sum_se;
  return rep;
}

struct CovarianceReport {
  double covariance = 0.0;
  double se = 0.0;
  bool non_positive = true;  // covariance <= 3 se
};

/// One-sided check that per-key estimates of two distinct keys are not
/// positively correlated.
inline CovarianceReport covariance_sign_check(std::span<const WorSample> runs, std::string_view x1,
                                              std::string_view x2, const StatisticSpec& spec) {
  if (x1 == x2) throw DomainError("covariance check needs two distinct keys");
  if (runs.size() < 3) throw DomainError("covariance check needs at least three runs");
  std::vector<double> a, b;
  for (const auto& s : runs) {
    a.push_back(per_key_estimate(s, x1, spec));
    b.push_back(per_key_estimate(s, x2, spec));
  }
  const auto ma = mean_stats(a), mb = mean_stats(b);
  std::vector<double> prod(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) prod[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
  const auto mp = mean_stats(prod);
  CovarianceReport rep;
  const double n = static_cast<double>(runs.size());
  rep.covariance = mp.mean * n / (n - 1.0);
  rep.se = mp.se * n / (n - 1.0);
  rep.non_positive = rep.covariance <= 3.0 * rep.se;
  return rep;
}

struct BiasRow {
  std::string key;
  double truth = 0.0;       // f(nu_x)
  double bias_ratio = 0.0;  // |mean(one-pass - perfect)| / f(nu_x)
  double mse = 0.0;         // one-pass mean squared error
  double perfect_var = 0.0;
  double envelope = 0.0;  // 2 * perfect_var + f(nu_x)^2
  bool bias_ok = true;
  bool mse_ok = true;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  double epsilon = 0.0;
  double bias_constant = 1.5;
  double max_bias_ratio = 0.0;
  bool passed = true;
};

/// Compares paired one-pass and perfect samples (same transform seeds) on
/// the per-key estimates of f for the given keys.
inline BiasReport bias_mse_report(std::span<const WorSample> one_pass, std::span<const WorSample> perfect,
                                  const FrequencyVector& v, const StatisticSpec& spec, double epsilon,
                                  std::span<const std::string> keys, double bias_constant = 1.5) {
  if (one_pass.size() != perfect.size() || one_pass.empty())
    throw DomainError("bias report needs paired runs of equal, nonzero count");
  BiasReport rep;
  rep.epsilon = epsilon;
  rep.bias_constant = bias_constant;
  for (const auto& key : keys) {
    BiasRow row;
    row.key = key;
    row.truth = spec.f(v.at(key));
    if (row.truth == 0.0) throw DomainError("bias report key '" + key + "' has f(nu) = 0");
    std::vector<double> diff, sq, perf;
    for (std::size_t i = 0; i < one_pass.size(); ++i) {
      const double e1 = per_key_estimate(one_pass[i], key, spec);
      const double e0 = per_key_estimate(perfect[i], key, spec);
      diff.push_back(e1 - e0);
      sq.push_back((e1 - row.truth) * (e1 - row.truth));
      perf.push_back(e0);
    }
    row.bias_ratio = std::abs(mean_stats(diff).mean) / std::abs(row.truth);
    row.mse = mean_stats(sq).mean;
    row.perfect_var = mean_stats(perf).var;
    row.envelope = 2.0 * row.perfect_var + row.truth * row.truth;
    row.bias_ok = row.bias_ratio <= bias_constant * epsilon;
    row.mse_ok = row.mse <= row.envelope;
    rep.max_bias_ratio = std::max(rep.max_bias_ratio, row.bias_ratio);
    rep.passed = rep.passed && row.bias_ok && row.mse_ok;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct SmoothnessReport {
  double c = 0.0;         // constant being checked
  double required = 0.0;  // smallest c that works on the grid
  bool holds = false;
};

/// Checks |f((1+e) w) - f(w)| <= c e f(w) on a grid of w > 0 and e in (0, 1/2].
inline SmoothnessReport smoothness_check(const std::function<double(double)>& f, double c,
                                         std::span<const double> ws, std::size_t eps_steps = 200) {
  SmoothnessReport rep;
  rep.c = c;
  for (double w : ws) {
    const double fw = f(w);
    if (!(fw > 0.0)) continue;
    for (std::size_t i = 1; i <= eps_steps; ++i) {
      const double e = 0.5 * static_cast<double>(i) / static_cast<double>(eps_steps);
      rep.required = std::max(rep.required, std::abs(f((1.0 + e) * w) - fw) / (e * fw));
    }
  }
  rep.holds = rep.required <= c * (1.0 + 1e-12);
  return rep;
}

}  // namespace worp
