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
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>

#include "worp/core.hpp"
#include "worp/error.hpp"
#include "worp/parallel.hpp"

namespace worp {

using Rng = std::mt19937_64;

/// Exp(1) draws (ziggurat).
inline double draw_exp(Rng& rng) {
  static thread_local boost::random::exponential_distribution<double> d(1.0);
  return d(rng);
}

/// Erlang(shape, 1) draws.
inline double draw_gamma(double shape, Rng& rng) {
  boost::random::gamma_distribution<double> d(shape, 1.0);
  return d(rng);
}

namespace detail {

inline double pow_rho(double x, double rho) noexcept {
  if (rho == 1.0) return x;
  if (rho == 2.0) return x * x;
  return std::pow(x, rho);
}

}  // namespace detail

/// One draw of R_{n,k,rho} = sum_{i>k} (S_k / S_i)^rho with S_i the prefix
/// sums of n i.i.d. Exp(1) variables.
inline double sample_R(std::uint64_t n, std::uint64_t k, double rho, Rng& rng) {
  if (k == 0 || k > n) throw DomainError("sample_R requires 1 <= k <= n");
  if (!(rho > 0.0)) throw DomainError("sample_R requires rho > 0");
  if (k == n) return 0.0;
  double s = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) s += draw_exp(rng);
  const double sk = s;
  double sum = 0.0;
  for (std::uint64_t i = k; i < n; ++i) {
    s += draw_exp(rng);
    sum += detail::pow_rho(sk / s, rho);
  }
  return sum;
}

/// Draws R_{n,k,rho} for several (k, rho) pairs from one shared Exp(1)
/// sequence. out[j * rhos.size() + r] receives the draw for (ks[j], rhos[r]).
/// Tail sums are accumulated per segment between consecutive k so no
/// cancellation occurs.
inline void sample_R_multi(std::uint64_t n, const std::vector<std::uint64_t>& ks, const std::vector<double>& rhos,
                           Rng& rng, double* out) {
  const std::size_t nk = ks.size(), nr = rhos.size();
  for (std::size_t j = 0; j < nk; ++j) {
    if (ks[j] == 0 || ks[j] > n) throw DomainError("sample_R requires 1 <= k <= n");
    if (j > 0 && ks[j] <= ks[j - 1]) throw DomainError("sample_R_multi requires strictly increasing k");
  }
  std::vector<double> seg(nk * nr, 0.0);  // seg[j*nr + r]: sum over k_j < i <= k_{j+1} of S_i^-rho
  std::vector<double> sk(nk, 0.0);
  double s = 0.0;
  std::size_t j = 0;  // number of ks already passed
  for (std::uint64_t i = 1; i <= n; ++i) {
    s += draw_exp(rng);
    if (j > 0) {
      const double inv = 1.0 / s;
      for (std::size_t r = 0; r < nr; ++r) seg[(j - 1) * nr + r] += detail::pow_rho(inv, rhos[r]);
    }
    if (j < nk && i == ks[j]) sk[j++] = s;
  }
  for (std::size_t r = 0; r < nr; ++r) {
    double tail = 0.0;
    for (std::size_t jj = nk; jj-- > 0;) {
      tail += seg[jj * nr + r];
      out[jj * nr + r] = detail::pow_rho(sk[jj], rhos[r]) * tail;
    }
  }
}

/// Tail bound for X ~ Erlang(l, 1): Pr[X >= eps*l] for eps >= 1 (upper),
/// Pr[X <= eps*l] for eps <= 1 (lower).
enum class TailSide { upper, lower };

inline double erlang_tail(double l, double eps, TailSide side) {
  if (!(l >= 1.0)) throw DomainError("erlang_tail requires l >= 1");
  if (!(eps > 0.0)) throw DomainError("erlang_tail requires eps > 0");
  const double rate = eps - 1.0 - std::log(eps);
  if (side == TailSide::upper) {
    if (eps < 1.0) throw DomainError("upper Erlang tail requires eps >= 1");
    return std::min(std::exp(-l * rate) / eps, std::exp(1.0 - eps));
  }
  if (eps > 1.0) throw DomainError("lower Erlang tail requires eps <= 1");
  return std::exp(-l * rate);
}

/// One draw of (Gamma(k1) / (Gamma(k1) + Gamma(k2 - k1)))^rho.
inline double sample_G_prime(double rho, std::uint64_t k1, std::uint64_t k2, Rng& rng) {
  if (k1 == 0 || k1 >= k2) throw DomainError("sample_G_prime requires 1 <= k1 < k2");
  const double a = draw_gamma(static_cast<double>(k1), rng);
  const double b = draw_gamma(static_cast<double>(k2 - k1), rng);
  return detail::pow_rho(a / (a + b), rho);
}

inline constexpr std::size_t max_B = 63;

/// Smallest B in [2, 63] with Pr[G'_{rho,k+1,B(k+1)} > (1/3)^rho] <= delta.
/// The event does not depend on rho: it is Gamma(k+1) > (1/3) Gamma(B(k+1)).
inline std::size_t choose_B(std::size_t k, double delta, std::size_t trials = 100000, std::uint64_t seed = 1) {
  if (k == 0) throw DomainError("choose_B requires k >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("choose_B requires delta in (0, 1]");
  if (trials == 0) throw CalibrationError("choose_B needs at least one trial");
  const double shape = static_cast<double>(k + 1);
  Rng rng(task_seed(seed, 0xB));
  boost::random::gamma_distribution<double> g(shape, 1.0);
  std::vector<std::size_t> need(trials);
  for (auto& b : need) {
    const double a = g(rng);
    double rest = 0.0;
    std::size_t blocks = 1;
    while (rest < 2.0 * a && blocks <= max_B) {
      rest += g(rng);
      ++blocks;
    }
    b = blocks;  // max_B + 1 when even 63 blocks were not enough
  }
  std::sort(need.begin(), need.end());
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(trials)));
  const std::size_t b = rank == 0 ? 2 : need[std::min(rank, trials) - 1];
  return std::clamp<std::size_t>(b, 2, max_B);
}

/// Threshold t with Pr[R_{n,k,rho} >= t] <= 3e^{-k}, obtained by splitting
/// the tail into stretches of 2^h k terms and excluding Erlang bad events.
inline double concentration_threshold(std::uint64_t n, std::uint64_t k, double rho) {
  if (k == 0 || k > n) throw DomainError("concentration_threshold requires 1 <= k <= n");
  const double kd = static_cast<double>(k);
  double t = 2.0 * kd;
  double covered = 2.0 * kd;
  for (int h = 2; covered < static_cast<double>(n - k); ++h) {
    const double len = std::ldexp(kd, h);
    const double prev = std::ldexp(1.0, h) - 2.0;
    t += len * detail::pow_rho(3.2 / (3.2 + 0.15 * prev), rho);
    covered += len;
  }
  return t;
}

/// The sampling constant implied by psi: 1/(psi ln(n/k)) for rho = 1 and
/// max(rho - 1, 1/ln(n/k)) / psi for rho > 1.
inline double implied_c(std::uint64_t n, std::uint64_t k, double rho, double psi) {
  const double l = std::log(static_cast<double>(n) / static_cast<double>(k));
  if (!(l > 0.0)) throw DomainError("implied_c requires n > k");
  return rho == 1.0 ? 1.0 / (psi * l) : std::max(rho - 1.0, 1.0 / l) / psi;
}

struct Calibration {
  std::uint64_t n = 0;
  std::uint64_t k = 0;  // rHH parameter; a sample of size s uses k = s + 1
  double rho = 1.0;
  double delta = 0.01;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double quantile = 0.0;  // empirical (1 - delta)-quantile of R
  std::array<double, 2> quantile_ci{0.0, 0.0};
  double psi = 0.0;
  std::array<double, 2> psi_ci{0.0, 0.0};
  double implied_c = 0.0;
  std::array<double, 2> implied_c_ci{0.0, 0.0};
  std::size_t B = max_B;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

inline std::uint64_t default_trials(double delta) {
  return static_cast<std::uint64_t>(std::max(1e5, std::ceil(1000.0 / delta)));
}

namespace detail {

inline double type1_quantile(std::vector<double>& xs, double prob) {
  const auto n = xs.size();
  auto rank = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(rank - 1), xs.end());
  return xs[rank - 1];
}

// 95% percentile bootstrap interval of the (1 - delta)-quantile.
inline std::array<double, 2> bootstrap_quantile_ci(const std::vector<double>& draws, double prob, std::uint64_t seed,
                                                   std::size_t resamples = 200) {
  Rng rng(task_seed(seed, 0xB007));
  std::uniform_int_distribution<std::size_t> pick(0, draws.size() - 1);
  std::vector<double> buf(draws.size()), qs;
  qs.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& x : buf) x = draws[pick(rng)];
    qs.push_back(type1_quantile(buf, prob));
  }
  std::sort(qs.begin(), qs.end());
  auto at = [&](double pr) {
    const auto i = static_cast<std::size_t>(std::floor(pr * static_cast<double>(resamples - 1) + 0.5));
    return qs[std::min(i, resamples - 1)];
  };
  return {at(0.025), at(0.975)};
}

inline Calibration finish_calibration(std::uint64_t n, std::uint64_t k, double rho, double delta,
                                      std::uint64_t trials, std::uint64_t seed, std::vector<double> draws,
                                      bool with_B) {
  Calibration c;
  c.n = n;
  c.k = k;
  c.rho = rho;
  c.delta = delta;
  c.trials = trials;
  c.seed = seed;
  c.quantile_ci = bootstrap_quantile_ci(draws, 1.0 - delta, seed ^ (k * 1315423911ULL) ^ std::hash<double>{}(rho));
  c.quantile = type1_quantile(draws, 1.0 - delta);
  const double kd = static_cast<double>(k);
  if (!(c.quantile > 0.0)) throw CalibrationError("R quantile is zero; k must be below n");
  c.psi = kd / c.quantile;
  c.psi_ci = {kd / c.quantile_ci[1], kd / c.quantile_ci[0]};
  c.implied_c = implied_c(n, k, rho, c.psi);
  c.implied_c_ci = {implied_c(n, k, rho, c.psi_ci[1]), implied_c(n, k, rho, c.psi_ci[0])};
  if (with_B) c.B = choose_B(std::max<std::uint64_t>(1, k - 1), delta, std::max<std::uint64_t>(trials, 10000), seed);
  return c;
}

}  // namespace detail

struct CalibrationGrid {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> ks;
  std::vector<double> rhos;
  double delta = 0.01;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool with_B = true;
};

/// Psi for every (k, rho) of a grid, sharing one Monte Carlo run. Results
/// are ordered k-major and do not depend on the thread count.
inline std::vector<Calibration> estimate_psi_grid(CalibrationGrid g) {
  if (g.ks.empty() || g.rhos.empty()) throw CalibrationError("empty calibration grid");
  if (!(g.delta > 0.0 && g.delta < 1.0)) throw CalibrationError("delta must be in (0, 1)");
  if (g.trials == 0) g.trials = default_trials(g.delta);
  if (static_cast<double>(g.trials) < 100.0 / g.delta)
    throw CalibrationError("need at least 100/delta trials to resolve the (1-delta)-quantile");
  for (double r : g.rhos)
    if (!(r >= 1.0)) throw CalibrationError("rho must be >= 1");
  std::sort(g.ks.begin(), g.ks.end());
  g.ks.erase(std::unique(g.ks.begin(), g.ks.end()), g.ks.end());
  for (auto k : g.ks)
    if (k == 0 || k >= g.n) throw CalibrationError("calibration requires 1 <= k < n");

  const std::size_t cells = g.ks.size() * g.rhos.size();
  std::vector<std::vector<double>> draws(cells, std::vector<double>(g.trials));
  constexpr std::uint64_t chunk = 1000;
  const std::uint64_t tasks = (g.trials + chunk - 1) / chunk;
  parallel_for(tasks, g.threads, [&](std::size_t t) {
    Rng rng(task_seed(g.seed, t));
    std::vector<double> out(cells);
    const std::uint64_t lo = t * chunk, hi = std::min(g.trials, lo + chunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      sample_R_multi(g.n, g.ks, g.rhos, rng, out.data());
      for (std::size_t c = 0; c < cells; ++c) draws[c][i] = out[c];
    }
  });
  std::vector<Calibration> result;
  result.reserve(cells);
  for (std::size_t j = 0; j < g.ks.size(); ++j)
    for (std::size_t r = 0; r < g.rhos.size(); ++r)
      result.push_back(detail::finish_calibration(g.n, g.ks[j], g.rhos[r], g.delta, g.trials, g.seed,
                                                  std::move(draws[j * g.rhos.size() + r]), g.with_B));
  return result;
}

/// Psi_{n,k,rho}(delta) = k / z' with z' the empirical (1-delta)-quantile of R.
inline Calibration estimate_psi(std::uint64_t n, std::uint64_t k, double rho, double delta, std::uint64_t trials = 0,
                                std::uint64_t seed = 1, unsigned threads = 1) {
  return estimate_psi_grid({n, {k}, {rho}, delta, trials, seed, threads, true}).front();
}

/// Result of comparing the ratio statistic F of a transformed vector with R.
struct DominationReport {
  std::vector<double> grid;
  std::vector<double> cdf_f;
  std::vector<double> cdf_r;
  double max_violation = 0.0;  // max over the grid of CDF_R - CDF_F
  double max_gap = 0.0;        // max over the grid of |CDF_R - CDF_F|
  double tolerance = 0.02;
  bool passed = false;
};

/// Draws F = ||tail_k(w*)||_q^q / (w*_(k))^q from fresh transforms of v and
/// R_{n,k,q/p} with n = |support(v)|, and checks CDF_F >= CDF_R - tolerance on
/// a grid of 201 pooled quantiles.
inline DominationReport empirical_domination_check(const FrequencyVector& v, double p, double q, std::size_t k,
                                                   std::size_t trials, std::uint64_t seed = 1,
                                                   double tolerance = 0.02, unsigned threads = 1) {
  if (v.empty()) throw DomainError("domination check needs a nonzero vector");
  if (k == 0 || k >= v.size()) throw DomainError("domination check requires 1 <= k < support size");
  if (!(p > 0.0) || !(q > 0.0) || q < p) throw DomainError("domination check requires 0 < p <= q");
  if (trials == 0) throw DomainError("domination check needs trials");
  const auto mags = v.magnitudes();
  const std::uint64_t n = mags.size();
  const double rho = q / p;
  std::vector<double> fs(trials), rs(trials);
  constexpr std::size_t chunk = 500;
  const std::size_t tasks = (trials + chunk - 1) / chunk;
  parallel_for(tasks, threads, [&](std::size_t t) {
    Rng rng(task_seed(seed, t));
    std::vector<double> w(n);
    const std::size_t lo = t * chunk, hi = std::min(trials, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t x = 0; x < n; ++x) w[x] = detail::pow_rho(mags[x], p) / draw_exp(rng);  // (w*)^p
      std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k - 1), w.end(), std::greater<>());
      const double kth = w[k - 1];
      double tail = 0.0;
      for (std::size_t x = k; x < n; ++x) tail += detail::pow_rho(w[x] / kth, rho);
      fs[i] = tail;
      rs[i] = sample_R(n, k, rho, rng);
    }
  });
  std::vector<double> pooled;
  pooled.reserve(2 * trials);
  pooled.insert(pooled.end(), fs.begin(), fs.end());
  pooled.insert(pooled.end(), rs.begin(), rs.end());
  std::sort(pooled.begin(), pooled.end());
  std::sort(fs.begin(), fs.end());
  std::sort(rs.begin(), rs.end());
  DominationReport rep;
  rep.tolerance = tolerance;
  for (int g = 0; g <= 200; ++g) {
    const auto idx = static_cast<std::size_t>(std::llround(g / 200.0 * static_cast<double>(pooled.size() - 1)));
    const double t = pooled[idx];
    const double cf = static_cast<double>(std::upper_bound(fs.begin(), fs.end(), t) - fs.begin()) / trials;
    const double cr = static_cast<double>(std::upper_bound(rs.begin(), rs.end(), t) - rs.begin()) / trials;
    rep.grid.push_back(t);
    rep.cdf_f.push_back(cf);
    rep.cdf_r.push_back(cr);
    rep.max_violation = std::max(rep.max_violation, cr - cf);
    rep.max_gap = std::max(rep.max_gap, std::abs(cr - cf));
  }
  rep.passed = rep.max_violation < tolerance;
  return rep;
}

}  // namespace worp
