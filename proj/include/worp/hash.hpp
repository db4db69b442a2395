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
#include <string_view>

namespace worp {

// Independent hash families derived from one job seed.
enum class Purpose : std::uint64_t {
  TransformExp = 1,
  TransformUniform = 2,
  KeyHash = 3,
  SketchRow = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded 64-bit hash of a byte string. Eight bytes at a time, each folded
// through the splitmix64 finalizer; the length is mixed into the initial
// state so "a" and "a\0" differ.
inline std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = splitmix64(seed ^ (0x243f6a8885a308d3ULL * (bytes.size() + 1)));
  std::size_t i = 0;
  for (; i + 8 <= bytes.size(); i += 8) {
    std::uint64_t chunk;
    std::memcpy(&chunk, bytes.data() + i, 8);
    h = splitmix64(h ^ chunk);
  }
  if (i < bytes.size()) {
    std::uint64_t chunk = 0;
    std::memcpy(&chunk, bytes.data() + i, bytes.size() - i);
    h = splitmix64(h ^ chunk ^ 0xff51afd7ed558ccdULL);
  }
  return h;
}

inline std::uint64_t hash_u64(std::uint64_t value, std::uint64_t seed) noexcept {
  return splitmix64(splitmix64(seed) ^ value);
}

// Maps a 64-bit hash to the open interval (0,1) using its top 53 bits.
constexpr double unit_open(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

// Lemire's multiply-shift range reduction into [0, n).
constexpr std::uint64_t fast_range(std::uint64_t h, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * n) >> 64);
}

// Deterministic per-key randomness: a pure function of (seed, purpose, key).
class SeedRand {
 public:
  constexpr SeedRand(std::uint64_t seed, Purpose purpose) noexcept
      : seed_(seed), purpose_(purpose),
        stream_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose)))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  Purpose purpose() const noexcept { return purpose_; }

  std::uint64_t bits(std::string_view key) const noexcept { return hash_bytes(key, stream_); }
  std::uint64_t bits(std::uint64_t key) const noexcept { return hash_u64(key, stream_); }

  double uniform01(std::string_view key) const noexcept { return unit_open(bits(key)); }
  double exp1(std::string_view key) const noexcept { return -std::log(uniform01(key)); }
  std::uint64_t index(std::string_view key, std::uint64_t n) const noexcept {
    return fast_range(bits(key), n);
  }

 private:
  std::uint64_t seed_;
  Purpose purpose_;
  std::uint64_t stream_;
};

}  // namespace worp
