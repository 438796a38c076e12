// Copyright 2026 the specdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "specdec/draftjoint.hpp"
#include "specdec/synthlab.hpp"
#include "specdec/treesim.hpp"

namespace {

using namespace specdec;

void BM_CategoricalSample(benchmark::State& state) {
    const auto [p, q] = synth_pair(0.6, 0.7, static_cast<size_t>(state.range(0)),
                                   5, 0, 0);
    const CategoricalSampler sampler(q.span());
    Rng rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.sample(rng));
    }
}
BENCHMARK(BM_CategoricalSample)->Arg(50)->Arg(10000);

void BM_SampleHubPair(benchmark::State& state) {
    const auto [p, q] = synth_pair(0.6, 0.7, static_cast<size_t>(state.range(0)),
                                   5, 0, 0);
    const auto joint = PairJoint::hub(q);
    Rng rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_pair(joint, rng));
    }
}
BENCHMARK(BM_SampleHubPair)->Arg(50)->Arg(10000);

void BM_SimulateStepBinaryDepth5(benchmark::State& state) {
    const auto tree = TreeTopology::full(2, 5);
    const auto proc = DistProcess::synthetic(0.6, 0.7, 50, 17);
    Rng rng(3);
    int step = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            simulate_step(tree, proc, VerifyMethod::kSpecHub, step++ % 1000, rng));
    }
}
BENCHMARK(BM_SimulateStepBinaryDepth5);

}  // namespace
