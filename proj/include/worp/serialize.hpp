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
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "worp/accumulator.hpp"
#include "worp/error.hpp"
#include "worp/rhh.hpp"

// Sketch blob layout, all integers little-endian, doubles as IEEE-754 bits:
//
//   "WRPS"  u16 version  u8 kind (1 projection, 2 counters)  u8 cell (0, 1 float, 2 fixed)
//   u64 k  f64 psi  f64 delta  u8 q  u64 n  u64 seed
//   f64 c_rows  f64 c_width  f64 c_counters
//   u8 override-mask (1 rows, 2 width, 4 capacity)  u64 rows  u64 width  u64 capacity
//   projection: u64 rows  u64 width  then rows*width cells, row-major
//               (float: f64; fixed: u64 low word, u64 high word)
//   counters:   u64 entries  f64 total  then per key ascending: u64 key  f64 count  f64 error

namespace worp {

inline constexpr std::uint16_t sketch_format_version = 1;

namespace detail {

class Writer {
 public:
  void u8(std::uint8_t x) { out_.push_back(static_cast<char>(x)); }
  void u16(std::uint16_t x) {
    for (int i = 0; i < 2; ++i) u8(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint16_t u16() {
    std::uint16_t x = 0;
    for (int i = 0; i < 2; ++i) x |= static_cast<std::uint16_t>(u8()) << (8 * i);
    return x;
  }
  std::uint64_t u64() {
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("sketch blob is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

inline void write_header(Writer& w, std::uint8_t kind, std::uint8_t cell, const RhhConfig& c) {
  w.bytes("WRPS");
  w.u16(sketch_format_version);
  w.u8(kind);
  w.u8(cell);
  w.u64(c.k);
  w.f64(c.psi);
  w.f64(c.delta);
  w.u8(static_cast<std::uint8_t>(c.q));
  w.u64(c.n);
  w.u64(c.seed);
  w.f64(c.c_rows);
  w.f64(c.c_width);
  w.f64(c.c_counters);
  w.u8(static_cast<std::uint8_t>((c.rows_override ? 1 : 0) | (c.width_override ? 2 : 0) |
                                 (c.capacity_override ? 4 : 0)));
  w.u64(c.rows_override.value_or(0));
  w.u64(c.width_override.value_or(0));
  w.u64(c.capacity_override.value_or(0));
}

struct Header {
  std::uint8_t kind;
  std::uint8_t cell;
  RhhConfig cfg;
};

inline Header read_header(Reader& r) {
  if (r.bytes(4) != "WRPS") throw FormatError("not a sketch blob");
  if (const auto v = r.u16(); v != sketch_format_version)
    throw FormatError("unsupported sketch blob version " + std::to_string(v));
  Header h;
  h.kind = r.u8();
  h.cell = r.u8();
  h.cfg.k = r.u64();
  h.cfg.psi = r.f64();
  h.cfg.delta = r.f64();
  h.cfg.q = r.u8();
  h.cfg.n = r.u64();
  h.cfg.seed = r.u64();
  h.cfg.c_rows = r.f64();
  h.cfg.c_width = r.f64();
  h.cfg.c_counters = r.f64();
  const auto mask = r.u8();
  const auto rows = r.u64(), width = r.u64(), cap = r.u64();
  if (mask & 1) h.cfg.rows_override = rows;
  if (mask & 2) h.cfg.width_override = width;
  if (mask & 4) h.cfg.capacity_override = cap;
  try {
    h.cfg.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("sketch blob has an invalid configuration: ") + e.what());
  }
  return h;
}

}  // namespace detail

template <SketchCell Cell>
std::string serialize(const ProjectionSketch<Cell>& s) {
  detail::Writer w;
  detail::write_header(w, 1, Cell::type_tag, s.config());
  w.u64(s.rows());
  w.u64(s.width());
  for (const Cell& c : s.table()) {
    if constexpr (std::is_same_v<Cell, FloatCell>) {
      w.f64(c.v);
    } else {
      const auto u = static_cast<unsigned __int128>(c.v);
      w.u64(static_cast<std::uint64_t>(u));
      w.u64(static_cast<std::uint64_t>(u >> 64));
    }
  }
  return w.take();
}

inline std::string serialize(const CounterSketch& s) {
  detail::Writer w;
  detail::write_header(w, 2, 0, s.config());
  const auto keys = s.keys();
  w.u64(keys.size());
  w.f64(s.total());
  for (auto k : keys) {
    const auto c = *s.counter(k);
    w.u64(k);
    w.f64(c.count);
    w.f64(c.error);
  }
  return w.take();
}

template <SketchCell Cell>
ProjectionSketch<Cell> deserialize_projection(std::string_view blob) {
  detail::Reader r(blob);
  const auto h = detail::read_header(r);
  if (h.kind != 1) throw FormatError("blob does not hold a projection sketch");
  if (h.cell != Cell::type_tag) throw FormatError("blob cell type does not match");
  ProjectionSketch<Cell> s(h.cfg);
  if (r.u64() != s.rows() || r.u64() != s.width()) throw FormatError("blob table shape does not match its configuration");
  for (Cell& c : s.mutable_table()) {
    if constexpr (std::is_same_v<Cell, FloatCell>) {
      c.v = r.f64();
    } else {
      const std::uint64_t lo = r.u64(), hi = r.u64();
      c.v = static_cast<__int128>((static_cast<unsigned __int128>(hi) << 64) | lo);
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after sketch blob");
  return s;
}

inline CounterSketch deserialize_counters(std::string_view blob) {
  detail::Reader r(blob);
  const auto h = detail::read_header(r);
  if (h.kind != 2) throw FormatError("blob does not hold a counter sketch");
  const auto count = r.u64();
  const double total = r.f64();
  if (count > blob.size() / 24) throw FormatError("counter entry count exceeds blob size");
  std::vector<std::pair<std::uint64_t, CounterSketch::Counter>> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto k = r.u64();
    const double c = r.f64(), e = r.f64();
    entries.push_back({k, {c, e}});
  }
  if (!r.done()) throw FormatError("trailing bytes after sketch blob");
  return CounterSketch::restore(h.cfg, entries, total);
}

}  // namespace worp
