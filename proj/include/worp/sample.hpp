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
#include <string>
#include <string_view>
#include <vector>

#include "worp/core.hpp"
#include "worp/error.hpp"

namespace worp {

enum class SampleMode { exact2pass, approx1pass };

inline std::string_view to_string(SampleMode m) noexcept {
  return m == SampleMode::exact2pass ? "exact2pass" : "approx1pass";
}
inline SampleMode sample_mode_from(std::string_view s) {
  if (s == "exact2pass") return SampleMode::exact2pass;
  if (s == "approx1pass") return SampleMode::approx1pass;
  throw FormatError("unknown sample mode '" + std::string(s) + "'");
}

inline std::string_view to_string(RDist d) noexcept { return d == RDist::Exp1 ? "exp1" : "uniform01"; }
inline RDist rdist_from(std::string_view s) {
  if (s == "exp1" || s == "ppswor") return RDist::Exp1;
  if (s == "uniform01" || s == "priority") return RDist::Uniform01;
  throw FormatError("unknown r distribution '" + std::string(s) + "'");
}

struct SampleEntry {
  std::string key;
  double frequency = 0.0;    // exact nu_x, or nu'_x for one-pass samples
  double transformed = 0.0;  // nu*_x (exact or estimated)

  friend bool operator==(const SampleEntry&, const SampleEntry&) = default;
};

/// A bottom-k sample: entries in decreasing |transformed| and the threshold tau.
struct WorSample {
  std::vector<SampleEntry> entries;
  double tau = 0.0;
  SampleMode mode = SampleMode::exact2pass;
  double p = 1.0;
  std::uint64_t seed = 0;
  RDist dist = RDist::Exp1;
  bool underfull = false;  // fewer than k+1 keys; entries hold every key exactly
  bool failed = false;     // the sketch's failure test fired

  std::size_t size() const noexcept { return entries.size(); }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.key);
    return out;
  }

  friend bool operator==(const WorSample&, const WorSample&) = default;
};

}  // namespace worp
