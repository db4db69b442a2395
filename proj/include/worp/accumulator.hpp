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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include "worp/error.hpp"

namespace worp {

/// Plain double accumulator. Merge results can differ from a single build in
/// the last bits because floating-point addition is not associative.
struct FloatCell {
  static constexpr std::uint8_t type_tag = 1;

  double v = 0.0;

  void add(double x) noexcept { v += x; }
  void merge(const FloatCell& o) noexcept { v += o.v; }
  double get() const noexcept { return v; }

  friend bool operator==(const FloatCell& a, const FloatCell& b) noexcept {
    std::uint64_t x, y;
    std::memcpy(&x, &a.v, 8);
    std::memcpy(&y, &b.v, 8);
    return x == y;
  }
};

/// Fixed-point accumulator with 40 fractional bits in a signed 128-bit word.
/// Every update is rounded once on entry and then summed exactly, so any
/// split-and-merge order produces the same bits.
struct FixedCell {
  static constexpr std::uint8_t type_tag = 2;
  static constexpr int frac_bits = 40;

  __int128 v = 0;

  static __int128 quantize(double x) {
    const long double scaled = std::ldexp(static_cast<long double>(x), frac_bits);
    if (!(std::fabs(scaled) < 0x1p120L)) throw DomainError("fixed-point cell overflow");
    return static_cast<__int128>(std::nearbyintl(scaled));
  }

  void add(double x) { accumulate(quantize(x)); }
  void merge(const FixedCell& o) { accumulate(o.v); }
  double get() const noexcept {
    return static_cast<double>(std::ldexp(static_cast<long double>(v), -frac_bits));
  }

  friend bool operator==(const FixedCell&, const FixedCell&) = default;

 private:
  void accumulate(__int128 d) {
    __int128 out;
    if (__builtin_add_overflow(v, d, &out)) throw DomainError("fixed-point cell overflow");
    v = out;
  }
};

template <class C>
concept SketchCell = requires(C c, const C& o, double x) {
  { C::type_tag } -> std::convertible_to<std::uint8_t>;
  c.add(x);
  c.merge(o);
  { o.get() } -> std::convertible_to<double>;
};

}  // namespace worp
