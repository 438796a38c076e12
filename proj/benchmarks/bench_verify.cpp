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

#include "specdec/synthlab.hpp"
#include "specdec/verify.hpp"

namespace {

using namespace specdec;

std::pair<Distribution, Distribution> bench_pair(size_t vocab) {
    return synth_pair(0.6, 0.7, vocab, 1234, 0, 0);
}

void BM_SpecHubStep(benchmark::State& state) {
    const auto [p, q] = bench_pair(static_cast<size_t>(state.range(0)));
    Rng rng(7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spechub_step(p, q, rng));
    }
}
BENCHMARK(BM_SpecHubStep)->Arg(50)->Arg(1000)->Arg(10000);

void BM_RrsVerify(benchmark::State& state) {
    const auto [p, q] = bench_pair(static_cast<size_t>(state.range(0)));
    Rng rng(7);
    for (auto _ : state) {
        const auto drafts = sample_drafts_rrs(q, 2, true, rng);
        benchmark::DoNotOptimize(rrs_verify(p, q, drafts, true, rng));
    }
}
BENCHMARK(BM_RrsVerify)->Arg(50)->Arg(1000)->Arg(10000);

void BM_AnalyticSpecHubRates(benchmark::State& state) {
    const auto [p, q] = bench_pair(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(analytic_rates_spechub(p, q));
    }
}
BENCHMARK(BM_AnalyticSpecHubRates)->Arg(50)->Arg(1000)->Arg(10000);

void BM_ExactOutputDistRrsw(benchmark::State& state) {
    const auto [p, q] = bench_pair(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_output_dist(VerifyMethod::kRrsw, p, q, 2));
    }
}
BENCHMARK(BM_ExactOutputDistRrsw)->Arg(8)->Arg(16);

}  // namespace
