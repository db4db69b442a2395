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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "worp/core.hpp"
#include "worp/error.hpp"

namespace worp {

/// Shortest decimal text that parses back to exactly x.
inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError("bad number '" + std::string(s) + "' in " + std::string(what));
  return out;
}

/// Parses one `key,value` record. The value follows the last comma, so keys
/// may themselves contain commas. Returns false for blank and '#' lines and
/// for a literal `key,value` header.
inline bool parse_element_line(std::string_view line, Element& out, std::size_t line_no = 0) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty() || line.front() == '#') return false;
  if (line == "key,value") return false;
  const auto comma = line.rfind(',');
  if (comma == std::string_view::npos || comma == 0)
    throw FormatError("line " + std::to_string(line_no) + ": expected key,value");
  out.key.assign(line.substr(0, comma));
  out.value = parse_double(line.substr(comma + 1), "line " + std::to_string(line_no));
  validate_element(out);
  return true;
}

/// A re-readable element file. Each for_each call streams the file again and
/// never buffers it.
class FileSource {
 public:
  explicit FileSource(std::string path) : path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

  template <class F>
  void for_each(F&& fn) const {
    std::ifstream in(path_);
    if (!in) throw FormatError("cannot open element file '" + path_ + "'");
    std::string line;
    Element e;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (parse_element_line(line, e, no)) fn(std::as_const(e));
    }
  }

 private:
  std::string path_;
};

/// In-memory elements behind the same two-pass interface.
class SpanSource {
 public:
  explicit SpanSource(std::span<const Element> elems) : elems_(elems) {}

  template <class F>
  void for_each(F&& fn) const {
    for (const Element& e : elems_) fn(e);
  }

 private:
  std::span<const Element> elems_;
};

template <class S>
concept ElementSource = requires(const S& s) { s.for_each([](const Element&) {}); };

inline std::vector<Element> read_elements(const std::string& path) {
  std::vector<Element> out;
  FileSource(path).for_each([&](const Element& e) { out.push_back(e); });
  return out;
}

inline void write_elements(std::ostream& os, std::span<const Element> elems) {
  for (const auto& e : elems) os << e.key << ',' << format_double(e.value) << '\n';
}

inline void write_elements(std::ostream& os, const FrequencyVector& v) {
  for (const auto& e : v) os << e.key << ',' << format_double(e.value) << '\n';
}

inline void write_elements_file(const std::string& path, std::span<const Element> elems) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write '" + path + "'");
  write_elements(os, elems);
}

}  // namespace worp
