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

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specdec/simplex.hpp"

namespace specdec {

/// Synthetic (target, draft) pair: both logit vectors are standard normal,
/// p = softmax(u_p / T) and q = softmax((lambda u_p + (1-lambda) u_q) / T).
/// lambda interpolates from unrelated (0) to identical (1) distributions.
/// Addressed purely by (seed, key1, key2, slot), so pair i never depends on
/// how many pairs an experiment asked for.
std::pair<Distribution, Distribution> synth_pair(double temperature, double lambda,
                                                 size_t vocab, uint64_t seed,
                                                 uint64_t key1, uint64_t key2);

struct ToyConfig {
    double temperature = 1.0;  // > 0
    double lambda = 0.7;       // in [0, 1]
    size_t vocab = 50;
    int n_pairs = 100;
    long long mc_trials = 1000;
    uint64_t seed = 0;
};

struct ToyRow {
    std::string method;
    double mean = 0.0;
    double std_error = 0.0;
    int fallbacks = 0;  // degenerate instances scored as single-draft overlap
    ToyConfig config;
};

std::pair<Distribution, Distribution> gen_toy_pair(const ToyConfig& cfg,
                                                   uint64_t index);

/// Two-draft acceptance rates on n_pairs random instances, one row per
/// method. Closed-form where available (RRS by the residual recursion, the
/// hub scheme by its plan, OTM/OTMw by max flow on the independent /
/// without-replacement joint); RRSw by Monte Carlo with mc_trials runs per
/// pair. Means carry the standard error across pairs.
std::vector<ToyRow> toy_experiment(const ToyConfig& cfg);

struct DecayRow {
    std::string method;
    int position = 0;  // 1-based draft slot
    double mean = 0.0;
    double std_error = 0.0;
};

/// Per-position acceptance-rate decay up to k_max drafts: analytic for RRS,
/// Monte Carlo for RRSw, plus the hub scheme's two slots for comparison.
std::vector<DecayRow> decay_experiment(const ToyConfig& cfg, int k_max);

}  // namespace specdec
