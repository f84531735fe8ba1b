// Copyright 2026 The stackeq Authors
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

#include "stackeq/common.h"
#include "stackeq/markov_game.h"
#include "stackeq/matrix_game.h"
#include "stackeq/nn.h"
#include "stackeq/tabular.h"

namespace stackeq {
namespace {

void BM_SolveStackelberg(benchmark::State& state) {
  auto rng = MakeRng(7);
  const MatrixGame game =
      SampleRandomGame(static_cast<int>(state.range(0)), 0.5, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveStackelberg(game));
  }
}
BENCHMARK(BM_SolveStackelberg)->Arg(3)->Arg(10)->Arg(100);

void BM_EnumeratePureNash(benchmark::State& state) {
  auto rng = MakeRng(7);
  const MatrixGame game =
      SampleRandomGame(static_cast<int>(state.range(0)), 0.5, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(EnumeratePureNash(game));
  }
}
BENCHMARK(BM_EnumeratePureNash)->Arg(10)->Arg(100);

void BM_BilevelValueIterationGrid(benchmark::State& state) {
  const MarkovGameModel grid = MakeGridEnv();
  for (auto _ : state) {
    benchmark::DoNotOptimize(BilevelValueIteration(grid));
  }
}
BENCHMARK(BM_BilevelValueIterationGrid);

void BM_MlpForward(benchmark::State& state) {
  auto rng = MakeRng(7);
  const int hidden = static_cast<int>(state.range(0));
  const Mlp net = MakeMlp({16, hidden, hidden, 1}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(16, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Forward(net, x));
  }
}
BENCHMARK(BM_MlpForward)->Arg(32)->Arg(128);

void BM_MlpBackward(benchmark::State& state) {
  auto rng = MakeRng(7);
  const int hidden = static_cast<int>(state.range(0));
  const Mlp net = MakeMlp({16, hidden, hidden, 1}, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(16, 32);
  const Eigen::MatrixXd dy = Eigen::MatrixXd::Ones(1, 32);
  for (auto _ : state) {
    ForwardCache cache;
    Forward(net, x, &cache);
    benchmark::DoNotOptimize(Backward(net, cache, dy));
  }
}
BENCHMARK(BM_MlpBackward)->Arg(32)->Arg(128);

}  // namespace
}  // namespace stackeq

BENCHMARK_MAIN();
