// Copyright 2026 The gridtalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "gridtalk/structure.hpp"
#include "gridtalk/voxel.hpp"
#include "oracles.hpp"

namespace v = gridtalk::voxel;

namespace {

v::ActionLog make_log(int n) {
  gridtalk::Rng rng(11);
  v::State start;
  v::ActionLog log(start.world, start.agent);
  for (const auto& a : oracle::random_legal_actions(rng, start, n)) log.append(a);
  return log;
}

void BM_Replay(benchmark::State& state) {
  const auto log = make_log(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(v::replay(log));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Replay)->Arg(100)->Arg(1000)->Arg(10000);

void BM_Classify(benchmark::State& state) {
  gridtalk::Rng rng(12);
  const auto world = oracle::random_structure(rng, 40);
  for (auto _ : state) benchmark::DoNotOptimize(gridtalk::structure::classify_structure(world));
}
BENCHMARK(BM_Classify);

void BM_Match(benchmark::State& state) {
  gridtalk::Rng rng(13);
  const auto target = oracle::random_structure(rng, 40);
  const auto built = gridtalk::structure::shift_world(target, 1, -1);
  for (auto _ : state) benchmark::DoNotOptimize(gridtalk::structure::match(built, target));
}
BENCHMARK(BM_Match);

}  // namespace
