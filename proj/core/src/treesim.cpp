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

#include "specdec/treesim.hpp"

#include <algorithm>
#include <cmath>

#include "specdec/synthlab.hpp"

namespace specdec {

namespace {

int64_t process_key(int step, int depth) {
    return (static_cast<int64_t>(step) << 20) | static_cast<int64_t>(depth);
}

}  // namespace

TreeTopology TreeTopology::full(int branching, int depth) {
    if (branching < 1 || depth < 1) {
        throw std::invalid_argument("TreeTopology::full: branching and depth must be >= 1");
    }
    size_t nodes = 1;
    size_t level = 1;
    for (int d = 1; d < depth; ++d) {
        level *= static_cast<size_t>(branching);
        nodes += level;
        if (nodes > kMaxTreeNodes) {
            throw ResourceLimitError("TreeTopology::full: node cap exceeded");
        }
    }
    std::vector<int32_t> parents(nodes, -1);
    // Breadth-first layout: children of node i are contiguous.
    size_t next = 1;
    for (size_t i = 0; i < nodes && next < nodes; ++i) {
        for (int b = 0; b < branching && next < nodes; ++b) {
            parents[next++] = static_cast<int32_t>(i);
        }
    }
    return from_parents(std::move(parents),
                        "full:" + std::to_string(branching) + ":" + std::to_string(depth));
}

TreeTopology TreeTopology::from_parents(std::vector<int32_t> parents, std::string label) {
    const size_t n = parents.size();
    if (n == 0) throw std::invalid_argument("TreeTopology: empty parent vector");
    if (n > kMaxTreeNodes) {
        throw ResourceLimitError("TreeTopology: node cap exceeded");
    }

    TreeTopology tree;
    tree.parents_ = std::move(parents);
    tree.children_.assign(n, {});
    tree.root_ = -1;
    for (size_t i = 0; i < n; ++i) {
        const int32_t par = tree.parents_[i];
        if (par == -1) {
            if (tree.root_ != -1) {
                throw std::invalid_argument("TreeTopology: multiple roots");
            }
            tree.root_ = static_cast<int32_t>(i);
        } else if (par < 0 || static_cast<size_t>(par) >= n) {
            throw std::invalid_argument("TreeTopology: parent index out of range");
        } else {
            tree.children_[static_cast<size_t>(par)].push_back(static_cast<int32_t>(i));
        }
    }
    if (tree.root_ == -1) {
        throw std::invalid_argument("TreeTopology: no root");
    }

    // Depth per node; the walk to the root doubles as cycle detection.
    std::vector<int> depth(n, -1);
    depth[static_cast<size_t>(tree.root_)] = 0;
    for (size_t i = 0; i < n; ++i) {
        std::vector<size_t> path;
        size_t v = i;
        while (depth[v] < 0) {
            path.push_back(v);
            if (path.size() > n) {
                throw std::invalid_argument("TreeTopology: cycle detected");
            }
            const int32_t par = tree.parents_[v];
            if (par == -1) break;  // root already has depth 0
            v = static_cast<size_t>(par);
        }
        int d = depth[v];
        if (d < 0) {
            throw std::invalid_argument("TreeTopology: cycle detected");
        }
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            depth[*it] = ++d;
        }
    }
    tree.depth_levels_ = 1 + *std::max_element(depth.begin(), depth.end());
    tree.max_branching_ = 0;
    for (const auto& kids : tree.children_) {
        tree.max_branching_ = std::max(tree.max_branching_, static_cast<int>(kids.size()));
    }
    tree.label_ = label.empty() ? "parents:" + std::to_string(n) : std::move(label);
    return tree;
}

bool TreeTopology::is_binary() const {
    for (const auto& kids : children_) {
        if (!kids.empty() && kids.size() != 2) return false;
    }
    return true;
}

DistProcess DistProcess::synthetic(double temperature, double lambda, size_t vocab,
                                   uint64_t seed) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("DistProcess::synthetic: T must be positive");
    }
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("DistProcess::synthetic: lambda must be in [0,1]");
    }
    if (vocab < 2) {
        throw std::invalid_argument("DistProcess::synthetic: vocab must be >= 2");
    }
    DistProcess proc;
    proc.synthetic_ = true;
    proc.temperature_ = temperature;
    proc.lambda_ = lambda;
    proc.vocab_ = vocab;
    proc.seed_ = seed;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "synthetic:%g:%g:%zu", temperature, lambda, vocab);
    proc.label_ = buf;
    return proc;
}

DistProcess DistProcess::from_trace(std::vector<TraceRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("DistProcess::from_trace: no records");
    }
    DistProcess proc;
    proc.synthetic_ = false;
    proc.vocab_ = records.front().p.size();
    for (const auto& rec : records) {
        if (rec.p.size() != proc.vocab_) {
            throw std::invalid_argument(
                "DistProcess::from_trace: inconsistent vocabulary sizes");
        }
    }
    proc.records_ = std::move(records);
    proc.index_.reserve(proc.records_.size());
    for (size_t i = 0; i < proc.records_.size(); ++i) {
        proc.index_.emplace_back(
            process_key(proc.records_[i].step, proc.records_[i].depth), i);
    }
    std::sort(proc.index_.begin(), proc.index_.end());
    proc.label_ = "trace:" + std::to_string(proc.records_.size());
    return proc;
}

std::pair<Distribution, Distribution> DistProcess::at(int step, int depth) const {
    if (synthetic_) {
        return synth_pair(temperature_, lambda_, vocab_, seed_,
                          static_cast<uint64_t>(step), static_cast<uint64_t>(depth));
    }
    const int64_t key = process_key(step, depth);
    auto it = std::lower_bound(index_.begin(), index_.end(),
                               std::make_pair(key, static_cast<size_t>(0)));
    if (it == index_.end() || it->first != key) {
        throw EndOfTraceError("trace has no record for step " + std::to_string(step) +
                              ", depth " + std::to_string(depth));
    }
    // No renormalization here: the loader already snapped noisy arrays, and
    // replaying a generated trace must reproduce the synthetic pair bits.
    const TraceRecord& rec = records_[it->second];
    return {Distribution(rec.p), Distribution(rec.q)};
}

namespace {

struct StepStats {
    int tokens = 0;
    int root_slot = 0;  // 1-based accepted slot at the root, 0 if rejected
};

StepStats step_impl(const TreeTopology& tree, const DistProcess& proc,
                    VerifyMethod method, int step, Rng& rng) {
    if (method == VerifyMethod::kSingle) {
        throw std::invalid_argument("simulate_step: use rrs/rrsw/spechub");
    }
    StepStats stats;
    int32_t node = tree.root();
    int depth = 0;
    int accepted = 0;
    while (!tree.is_leaf(node)) {
        const auto [p, q] = proc.at(step, depth);
        const auto& kids = tree.children(node);
        VerifyOutcome outcome = [&] {
            if (method == VerifyMethod::kSpecHub) {
                if (kids.size() != 2) {
                    throw std::invalid_argument(
                        "simulate_step: hub scheme requires a binary tree");
                }
                return spechub_step(p, q, rng);
            }
            const bool wor = method == VerifyMethod::kRrsw;
            const auto drafts =
                sample_drafts_rrs(q, static_cast<int>(kids.size()), wor, rng);
            return rrs_verify(p, q, drafts, wor, rng);
        }();
        if (depth == 0) {
            stats.root_slot = outcome.accepted ? outcome.position : 0;
        }
        if (!outcome.accepted) {
            stats.tokens = accepted + 1;  // the bonus token from the residual
            return stats;
        }
        ++accepted;
        node = kids[static_cast<size_t>(outcome.position - 1)];
        ++depth;
    }
    // Every draft along the path was accepted; the bonus comes from the
    // leaf position's target distribution.
    const auto [p, q] = proc.at(step, depth);
    (void)q;
    (void)sample_categorical(p.span(), rng);
    stats.tokens = accepted + 1;
    if (tree.is_leaf(tree.root())) stats.root_slot = 0;
    return stats;
}

}  // namespace

int simulate_step(const TreeTopology& tree, const DistProcess& proc,
                  VerifyMethod method, int step, Rng& rng) {
    return step_impl(tree, proc, method, step, rng).tokens;
}

SimReport run_sim(const TreeTopology& tree, const DistProcess& proc,
                  VerifyMethod method, long long steps, Rng& rng) {
    if (steps < 1) throw std::invalid_argument("run_sim: steps must be >= 1");

    const size_t root_slots = tree.children(tree.root()).size();
    std::vector<long long> slot_counts(root_slots, 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long long s = 0; s < steps; ++s) {
        const StepStats stats = step_impl(tree, proc, method, static_cast<int>(s), rng);
        sum += stats.tokens;
        sum_sq += static_cast<double>(stats.tokens) * stats.tokens;
        if (stats.root_slot > 0) {
            ++slot_counts[static_cast<size_t>(stats.root_slot - 1)];
        }
    }

    SimReport report;
    report.steps = steps;
    const double n = static_cast<double>(steps);
    report.mean_tokens_per_step = sum / n;
    if (steps > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        report.std_error = std::sqrt(var / n);
    }
    report.root_rates.per_position.resize(root_slots);
    for (size_t i = 0; i < root_slots; ++i) {
        report.root_rates.per_position[i] = static_cast<double>(slot_counts[i]) / n;
    }
    report.root_rates.total = 0.0;
    for (double r : report.root_rates.per_position) report.root_rates.total += r;
    report.method = method_name(method);
    report.tree = tree.label();
    report.process = proc.label();
    return report;
}

double expected_tokens_given_rates(const TreeTopology& tree,
                                   const RateVector& slot_rates) {
    if (static_cast<int>(slot_rates.per_position.size()) < tree.max_branching()) {
        throw std::invalid_argument(
            "expected_tokens_given_rates: rate vector shorter than max branching");
    }
    double total_rate = 0.0;
    for (double r : slot_rates.per_position) total_rate += r;
    if (total_rate > 1.0 + 1e-9) {
        throw std::invalid_argument("expected_tokens_given_rates: rates sum above 1");
    }
    // Post-order accumulation over the node list (children have larger
    // indices than needed only via the recursion below).
    std::vector<double> expect(tree.size(), -1.0);
    // Iterative post-order using an explicit stack.
    std::vector<std::pair<int32_t, size_t>> stack;
    stack.emplace_back(tree.root(), 0);
    while (!stack.empty()) {
        auto& [node, child_idx] = stack.back();
        const auto& kids = tree.children(node);
        if (child_idx < kids.size()) {
            const int32_t next = kids[child_idx];
            ++child_idx;
            stack.emplace_back(next, 0);
            continue;
        }
        double e = 1.0;
        for (size_t i = 0; i < kids.size(); ++i) {
            e += slot_rates.per_position[i] * expect[static_cast<size_t>(kids[i])];
        }
        expect[static_cast<size_t>(node)] = e;
        stack.pop_back();
    }
    return expect[static_cast<size_t>(tree.root())];
}

}  // namespace specdec
