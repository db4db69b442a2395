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
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "worp/hash.hpp"

namespace worp {

inline unsigned hardware_threads() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Seed of task i derived from a job seed. Work is split into tasks whose
/// boundaries do not depend on the thread count, so results are reproducible
/// for any --threads value.
inline std::uint64_t task_seed(std::uint64_t seed, std::uint64_t task) noexcept {
  return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) + task);
}

/// Runs fn(i) for i in [0, tasks) on up to `threads` workers. The first
/// exception thrown by any task is rethrown on the caller.
template <class F>
void parallel_for(std::size_t tasks, unsigned threads, F&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(tasks, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(tasks);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace worp
