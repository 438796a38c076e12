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

#include <string>
#include <utility>
#include <vector>

#include "specdec/simplex.hpp"
#include "specdec/trace.hpp"
#include "specdec/verify.hpp"

namespace specdec {

/// Draft token tree. The root is the current decoding position (it carries
/// no draft); each internal node expands into its children as the draft
/// slots verified at that node, in slot order.
class TreeTopology {
public:
    /// Complete tree with `depth` levels counting the root. branching 1
    /// gives a chain of `depth` nodes.
    static TreeTopology full(int branching, int depth);

    /// Topology from a parent vector (root = -1); supports unbalanced trees
    /// supplied externally. Rejects cycles and multiple roots.
    static TreeTopology from_parents(std::vector<int32_t> parents,
                                     std::string label = "");

    size_t size() const { return parents_.size(); }
    int32_t root() const { return root_; }
    const std::vector<int32_t>& parents() const { return parents_; }
    const std::vector<int32_t>& children(int32_t node) const {
        return children_[static_cast<size_t>(node)];
    }
    bool is_leaf(int32_t node) const {
        return children_[static_cast<size_t>(node)].empty();
    }
    int depth_levels() const { return depth_levels_; }
    int max_branching() const { return max_branching_; }

    /// Every internal node has exactly two children (hub-scheme requirement).
    bool is_binary() const;

    const std::string& label() const { return label_; }

private:
    TreeTopology() = default;

    std::vector<int32_t> parents_;
    std::vector<std::vector<int32_t>> children_;
    int32_t root_ = 0;
    int depth_levels_ = 1;
    int max_branching_ = 0;
    std::string label_;
};

constexpr size_t kMaxTreeNodes = 1u << 20;

/// Source of per-(step, depth) (p, q) pairs for multi-step simulation.
class DistProcess {
public:
    /// Pure function of (seed, step, depth); same key, same pair.
    static DistProcess synthetic(double temperature, double lambda, size_t vocab,
                                 uint64_t seed);

    /// Replays recorded pairs keyed by (step, depth); missing keys raise
    /// EndOfTraceError.
    static DistProcess from_trace(std::vector<TraceRecord> records);

    std::pair<Distribution, Distribution> at(int step, int depth) const;

    size_t vocab() const { return vocab_; }
    const std::string& label() const { return label_; }

private:
    DistProcess() = default;

    bool synthetic_ = true;
    double temperature_ = 1.0;
    double lambda_ = 1.0;
    size_t vocab_ = 0;
    uint64_t seed_ = 0;
    std::vector<TraceRecord> records_;
    std::vector<std::pair<int64_t, size_t>> index_;  // key -> record, sorted
    std::string label_;
};

/// Aggregate of one simulated decoding run.
struct SimReport {
    long long steps = 0;
    double mean_tokens_per_step = 0.0;
    double std_error = 0.0;
    RateVector root_rates;  // empirical per-slot acceptance at the root
    std::string method;
    std::string tree;
    std::string process;
};

/// Walks one decoding step from the root: at each internal node the method
/// drafts the node's children from q, verifies, and descends into the
/// accepted child. Returns accepted tokens along the path plus one: the
/// residual sample on rejection, or a fresh target-model sample at a leaf.
int simulate_step(const TreeTopology& tree, const DistProcess& proc,
                  VerifyMethod method, int step, Rng& rng);

SimReport run_sim(const TreeTopology& tree, const DistProcess& proc,
                  VerifyMethod method, long long steps, Rng& rng);

/// Closed-form expected tokens per step when each node accepts child i
/// independently with probability slot_rates[i]:
/// E(node) = 1 + sum_i rate_i * E(child_i), E(leaf) = 1.
double expected_tokens_given_rates(const TreeTopology& tree,
                                   const RateVector& slot_rates);

}  // namespace specdec
