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

#include "gridtalk/dataset.hpp"
#include "gridtalk/ranking.hpp"
#include "gridtalk/verbalizer.hpp"
#include "oracles.hpp"

namespace {

void BM_Verbalize(benchmark::State& state) {
  gridtalk::Rng rng(21);
  const auto world = oracle::random_world(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gridtalk::verbal::verbalize_world(world));
}
BENCHMARK(BM_Verbalize)->Arg(15)->Arg(200);

void BM_Bm25(benchmark::State& state) {
  const auto pool = gridtalk::dataset::synth_question_pool();
  const std::string query = "place three red blocks on top of the blue tower to the left";
  for (auto _ : state) benchmark::DoNotOptimize(gridtalk::clarify::bm25_rank(query, pool));
}
BENCHMARK(BM_Bm25);

}  // namespace
