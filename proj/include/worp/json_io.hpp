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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "worp/calibration.hpp"
#include "worp/element_io.hpp"
#include "worp/error.hpp"
#include "worp/estimate.hpp"
#include "worp/sample.hpp"

namespace worp {

using json = nlohmann::ordered_json;

inline constexpr int calibration_format_version = 1;
inline constexpr int sample_format_version = 1;

inline void to_json(json& j, const Calibration& c) {
  j = json{{"format", "worp-calibration"},
           {"version", calibration_format_version},
           {"n", c.n},
           {"k", c.k},
           {"rho", c.rho},
           {"delta", c.delta},
           {"trials", c.trials},
           {"seed", c.seed},
           {"quantile", c.quantile},
           {"quantile_ci", c.quantile_ci},
           {"psi", c.psi},
           {"psi_ci", c.psi_ci},
           {"implied_c", c.implied_c},
           {"implied_c_ci", c.implied_c_ci},
           {"B", c.B}};
}

inline void from_json(const json& j, Calibration& c) {
  try {
    if (j.at("format") != "worp-calibration") throw FormatError("not a calibration record");
    if (j.at("version").get<int>() != calibration_format_version) throw FormatError("unsupported calibration version");
    j.at("n").get_to(c.n);
    j.at("k").get_to(c.k);
    j.at("rho").get_to(c.rho);
    j.at("delta").get_to(c.delta);
    j.at("trials").get_to(c.trials);
    j.at("seed").get_to(c.seed);
    j.at("quantile").get_to(c.quantile);
    j.at("quantile_ci").get_to(c.quantile_ci);
    j.at("psi").get_to(c.psi);
    j.at("psi_ci").get_to(c.psi_ci);
    j.at("implied_c").get_to(c.implied_c);
    j.at("implied_c_ci").get_to(c.implied_c_ci);
    j.at("B").get_to(c.B);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad calibration record: ") + e.what());
  }
}

inline void to_json(json& j, const WorSample& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"key", e.key}, {"frequency", e.frequency}, {"transformed", e.transformed}});
  j = json{{"format", "worp-sample"},
           {"version", sample_format_version},
           {"mode", to_string(s.mode)},
           {"p", s.p},
           {"dist", to_string(s.dist)},
           {"seed", s.seed},
           {"k", s.entries.size()},
           {"tau", s.tau},
           {"underfull", s.underfull},
           {"failed", s.failed},
           {"entries", std::move(entries)}};
}

inline void from_json(const json& j, WorSample& s) {
  try {
    if (j.at("format") != "worp-sample") throw FormatError("not a sample record");
    if (j.at("version").get<int>() != sample_format_version) throw FormatError("unsupported sample version");
    s.mode = sample_mode_from(j.at("mode").get<std::string>());
    j.at("p").get_to(s.p);
    s.dist = rdist_from(j.at("dist").get<std::string>());
    j.at("seed").get_to(s.seed);
    j.at("tau").get_to(s.tau);
    j.at("underfull").get_to(s.underfull);
    j.at("failed").get_to(s.failed);
    s.entries.clear();
    for (const auto& e : j.at("entries"))
      s.entries.push_back(
          {e.at("key").get<std::string>(), e.at("frequency").get<double>(), e.at("transformed").get<double>()});
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad sample record: ") + e.what());
  }
}

inline void to_json(json& j, const Estimate& e) {
  json per = json::object();
  for (const auto& [k, v] : e.contributions) per[k] = v;
  j = json{{"format", "worp-estimate"}, {"version", 1}, {"value", e.value}, {"mode_matched", e.mode_matched},
           {"contributions", std::move(per)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

/// File name of a cached calibration for the given inputs.
inline std::string calibration_cache_name(std::uint64_t n, std::uint64_t k, double rho, double delta,
                                          std::uint64_t trials, std::uint64_t seed) {
  std::ostringstream os;
  os << "cal-v" << calibration_format_version << "-n" << n << "-k" << k << "-rho" << format_double(rho) << "-d"
     << format_double(delta) << "-t" << trials << "-s" << seed << ".json";
  return os.str();
}

/// Reads a cached calibration from `dir`, computing and storing it on a miss.
inline Calibration cached_calibration(const std::filesystem::path& dir, std::uint64_t n, std::uint64_t k, double rho,
                                      double delta, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
  if (trials == 0) trials = default_trials(delta);
  const auto path = dir / calibration_cache_name(n, k, rho, delta, trials, seed);
  if (std::filesystem::exists(path)) {
    const Calibration c = read_json_file(path.string()).get<Calibration>();
    if (c.n == n && c.k == k && c.rho == rho && c.delta == delta && c.trials == trials && c.seed == seed) return c;
  }
  const Calibration c = estimate_psi(n, k, rho, delta, trials, seed, threads);
  std::filesystem::create_directories(dir);
  write_json_file(path.string(), json(c));
  return c;
}

}  // namespace worp
