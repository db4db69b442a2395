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

// Splits a Zipf stream across shards, samples each shard's sketch and
// collector independently, merges them and checks the result against a
// single-machine run.
#include <iostream>
#include <random>

#include "worp/worp.hpp"

using namespace worp;

int main() {
  const auto v = gen_zipf(1.5, 5000, 1000.0);
  std::vector<Element> stream;
  for (const auto& e : v) {
    stream.push_back({e.key, e.value + 3.0});
    stream.push_back({e.key, -3.0});
  }
  std::mt19937_64 rng(42);
  std::shuffle(stream.begin(), stream.end(), rng);

  WorpConfig cfg;
  cfg.k = 20;
  cfg.p = 1.0;
  cfg.q = 2;
  cfg.seed = 7;
  cfg.keyhash_n = 5001;
  cfg.mapping = KeyMapping::Integer;
  cfg.apply(estimate_psi(5000, cfg.k + 1, 2.0, 0.01, 0, 1), 2);

  const TwoPassWorp<DefaultProjection> w(cfg);
  constexpr std::size_t shards = 4;
  std::vector<std::vector<Element>> parts(shards);
  for (std::size_t i = 0; i < stream.size(); ++i) parts[i % shards].push_back(stream[i]);

  auto sketch = w.make_sketch();
  for (const auto& part : parts) {
    auto local = w.make_sketch();
    for (const auto& e : part) w.pass1(local, e);
    sketch.merge(local);
  }
  auto collector = w.make_collector();
  for (const auto& part : parts) {
    auto local = w.make_collector();
    for (const auto& e : part) w.pass2(local, sketch, e);
    collector.merge(local);
  }
  const WorSample merged = w.finalize(sketch, collector);
  const WorSample single = w.run(SpanSource(stream));
  const WorSample exact = exact_bottomk_sample(v, cfg.k, cfg.transform());

  std::cout << "sketch " << sketch.rows() << " x " << sketch.width() << ", collector capacity "
            << cfg.collect_capacity() << "\n";
  std::cout << "key,frequency,transformed\n";
  for (const auto& e : merged.entries) std::cout << e.key << ',' << e.frequency << ',' << e.transformed << '\n';
  std::cout << "tau " << merged.tau << "\n";
  std::cout << "merged == single machine: " << (merged == single ? "yes" : "no") << "\n";
  std::cout << "merged == exact bottom-k: " << (merged.keys() == exact.keys() ? "yes" : "no") << "\n";
  return merged == single ? 0 : 1;
}
