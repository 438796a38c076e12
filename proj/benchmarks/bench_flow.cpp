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

#include "specdec/coupling.hpp"
#include "specdec/synthlab.hpp"

namespace {

using namespace specdec;

// Hub-sparse networks stay O(V): the SpecHub-vs-optimal comparison runs at
// vocabulary sizes far beyond the dense LP.
void BM_MaxFlowHubSparse(benchmark::State& state) {
    const auto [p, q] = synth_pair(0.6, 0.7, static_cast<size_t>(state.range(0)),
                                   99, 0, 0);
    const auto joint = PairJoint::hub(q);
    for (auto _ : state) {
        benchmark::DoNotOptimize(max_flow(build_flow(joint, p)).value);
    }
}
BENCHMARK(BM_MaxFlowHubSparse)->Arg(100)->Arg(1000)->Arg(10000);

void BM_MaxFlowDenseIndependent(benchmark::State& state) {
    const auto [p, q] = synth_pair(0.6, 0.7, static_cast<size_t>(state.range(0)),
                                   99, 0, 0);
    const auto joint = PairJoint::independent(q);
    for (auto _ : state) {
        benchmark::DoNotOptimize(max_flow(build_flow(joint, p)).value);
    }
}
BENCHMARK(BM_MaxFlowDenseIndependent)->Arg(16)->Arg(50)->Arg(128);

void BM_FlowToPlanDense(benchmark::State& state) {
    const auto [p, q] = synth_pair(0.6, 0.7, static_cast<size_t>(state.range(0)),
                                   99, 0, 0);
    const auto joint = PairJoint::without_replacement(q);
    const auto net = build_flow(joint, p);
    const auto flow = max_flow(net);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flow_to_plan(net, flow, joint, p).total_accept());
    }
}
BENCHMARK(BM_FlowToPlanDense)->Arg(16)->Arg(50);

}  // namespace
