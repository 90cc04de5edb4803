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

#include "gridtalk/fusion.hpp"
#include "oracles.hpp"

namespace fu = gridtalk::fusion;

namespace {

void BM_FusionForward(benchmark::State& state) {
  fu::FusionModel model(fu::FusionConfig{});
  gridtalk::Rng rng(31);
  const auto world = fu::one_hot_encode(oracle::random_world(rng, 30));
  std::vector<int> tokens;
  for (int i = 0; i < 32; ++i) tokens.push_back(static_cast<int>(rng.below(model.config().vocab_size)));
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(world, tokens));
}
BENCHMARK(BM_FusionForward)->Unit(benchmark::kMillisecond);

void BM_OneHot(benchmark::State& state) {
  gridtalk::Rng rng(32);
  const auto world = oracle::random_world(rng, 100);
  for (auto _ : state) benchmark::DoNotOptimize(fu::one_hot_encode(world));
}
BENCHMARK(BM_OneHot);

}  // namespace
