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

#include "specdec/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace specdec {

namespace {

constexpr double kFlowScale = 281474976710656.0;  // 2^48
constexpr double kPlanTolerance = 1e-9;
constexpr double kTinyMass = 1e-15;

/// Dinic's algorithm over int64 capacities.
class Dinic {
public:
    explicit Dinic(int nodes) : graph_(nodes), level_(nodes), iter_(nodes) {}

    // Returns an id for later flow lookup.
    int add_edge(int from, int to, int64_t cap) {
        const int id = static_cast<int>(edges_.size());
        graph_[from].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({to, cap, cap});
        graph_[to].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({from, 0, 0});
        return id;
    }

    int64_t solve(int s, int t) {
        int64_t flow = 0;
        while (bfs(s, t)) {
            std::fill(iter_.begin(), iter_.end(), 0);
            while (int64_t pushed = dfs(s, t, INT64_MAX)) {
                flow += pushed;
            }
        }
        return flow;
    }

    int64_t flow_on(int id) const { return edges_[id].orig - edges_[id].cap; }

private:
    struct Edge {
        int to;
        int64_t cap;
        int64_t orig;
    };

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::vector<int> queue;
        queue.reserve(level_.size());
        level_[s] = 0;
        queue.push_back(s);
        for (size_t head = 0; head < queue.size(); ++head) {
            const int v = queue[head];
            for (int eid : graph_[v]) {
                const Edge& e = edges_[eid];
                if (e.cap > 0 && level_[e.to] < 0) {
                    level_[e.to] = level_[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    int64_t dfs(int v, int t, int64_t limit) {
        if (v == t) return limit;
        for (int& i = iter_[v]; i < static_cast<int>(graph_[v].size()); ++i) {
            const int eid = graph_[v][static_cast<size_t>(i)];
            Edge& e = edges_[eid];
            if (e.cap <= 0 || level_[v] + 1 != level_[e.to]) continue;
            const int64_t pushed = dfs(e.to, t, std::min(limit, e.cap));
            if (pushed > 0) {
                e.cap -= pushed;
                edges_[eid ^ 1].cap += pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<std::vector<int>> graph_;
    std::vector<Edge> edges_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

std::vector<SimplifiedPlan::Entry> support_entries(const PairJoint& joint) {
    std::vector<SimplifiedPlan::Entry> entries;
    const auto vocab = static_cast<Token>(joint.vocab());
    if (joint.kind() == PairJoint::Kind::kDense) {
        const auto& m = joint.matrix();
        for (Token i = 0; i < vocab; ++i) {
            for (Token j = 0; j < vocab; ++j) {
                const double mass = m[static_cast<size_t>(i) * joint.vocab() +
                                      static_cast<size_t>(j)];
                if (mass > 0.0) entries.push_back({i, j, mass, 0.0, 0.0});
            }
        }
        return entries;
    }
    const Token a = joint.hub_token();
    for (Token x = 0; x < vocab; ++x) {
        if (x == a) continue;
        const double col = joint.hub_col()[static_cast<size_t>(x)];
        if (col > 0.0) entries.push_back({x, a, col, 0.0, 0.0});
        const double row = joint.hub_row()[static_cast<size_t>(x)];
        if (row > 0.0) entries.push_back({a, x, row, 0.0, 0.0});
    }
    return entries;
}

}  // namespace

FlowNetwork build_flow(const PairJoint& joint, const Distribution& p) {
    if (joint.vocab() != p.size()) {
        throw std::invalid_argument("build_flow: vocabulary size mismatch");
    }
    FlowNetwork net;
    net.vocab = p.size();
    net.sink_cap = p.probs();
    net.source_cap.assign(net.vocab, 0.0);
    for (size_t v = 0; v < net.vocab; ++v) {
        net.source_cap[v] = joint.first_marginal(static_cast<Token>(v));
    }
    for (const auto& e : support_entries(joint)) {
        if (e.x1 == e.x2) continue;  // diagonal pairs route s -> v -> t only
        net.pair_edges.push_back({e.x1, e.x2, e.pair_mass});
    }
    return net;
}

MaxFlowResult max_flow(const FlowNetwork& net) {
    const int vocab = static_cast<int>(net.vocab);
    const int source = vocab;
    const int sink = vocab + 1;
    Dinic dinic(vocab + 2);

    auto scaled = [](double cap) {
        return static_cast<int64_t>(std::llround(cap * kFlowScale));
    };

    std::vector<int> source_ids(net.vocab), sink_ids(net.vocab);
    for (int v = 0; v < vocab; ++v) {
        source_ids[static_cast<size_t>(v)] =
            dinic.add_edge(source, v, scaled(net.source_cap[static_cast<size_t>(v)]));
        sink_ids[static_cast<size_t>(v)] =
            dinic.add_edge(v, sink, scaled(net.sink_cap[static_cast<size_t>(v)]));
    }
    std::vector<int> pair_ids(net.pair_edges.size());
    for (size_t e = 0; e < net.pair_edges.size(); ++e) {
        const auto& edge = net.pair_edges[e];
        pair_ids[e] = dinic.add_edge(edge.from, edge.to, scaled(edge.cap));
    }

    const int64_t value = dinic.solve(source, sink);

    MaxFlowResult result;
    result.value = static_cast<double>(value) / kFlowScale;
    result.source_flow.resize(net.vocab);
    result.sink_flow.resize(net.vocab);
    result.pair_flow.resize(net.pair_edges.size());
    for (size_t v = 0; v < net.vocab; ++v) {
        result.source_flow[v] =
            static_cast<double>(dinic.flow_on(source_ids[v])) / kFlowScale;
        result.sink_flow[v] =
            static_cast<double>(dinic.flow_on(sink_ids[v])) / kFlowScale;
    }
    for (size_t e = 0; e < net.pair_edges.size(); ++e) {
        result.pair_flow[e] =
            static_cast<double>(dinic.flow_on(pair_ids[e])) / kFlowScale;
    }
    return result;
}

SimplifiedPlan::SimplifiedPlan(size_t vocab, std::vector<Entry> entries,
                               std::vector<double> target)
    : vocab_(vocab), entries_(std::move(entries)), target_(std::move(target)) {
    if (target_.size() != vocab_) {
        throw std::invalid_argument("SimplifiedPlan: target size mismatch");
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.x1 != b.x1 ? a.x1 < b.x1 : a.x2 < b.x2;
    });
    accepted_mass_.assign(vocab_, 0.0);
    for (const Entry& e : entries_) {
        if (e.x1 < 0 || static_cast<size_t>(e.x1) >= vocab_ || e.x2 < 0 ||
            static_cast<size_t>(e.x2) >= vocab_) {
            throw std::invalid_argument("SimplifiedPlan: token out of range");
        }
        if (e.accept1 < -kPlanTolerance || e.accept2 < -kPlanTolerance) {
            throw std::invalid_argument("SimplifiedPlan: negative acceptance entry");
        }
        if (e.accept1 + e.accept2 > e.pair_mass + kPlanTolerance) {
            throw std::invalid_argument("SimplifiedPlan: acceptance exceeds pair mass");
        }
        accepted_mass_[static_cast<size_t>(e.x1)] += e.accept1;
        accepted_mass_[static_cast<size_t>(e.x2)] += e.accept2;
        total_accept_ += e.accept1 + e.accept2;
    }
    for (size_t y = 0; y < vocab_; ++y) {
        if (accepted_mass_[y] > target_[y] + kPlanTolerance) {
            throw std::invalid_argument(
                "SimplifiedPlan: token accepts more than its target mass");
        }
    }
}

const SimplifiedPlan::Entry* SimplifiedPlan::find(Token x1, Token x2) const {
    const Entry probe{x1, x2, 0.0, 0.0, 0.0};
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), probe,
        [](const Entry& a, const Entry& b) {
            return a.x1 != b.x1 ? a.x1 < b.x1 : a.x2 < b.x2;
        });
    if (it == entries_.end() || it->x1 != x1 || it->x2 != x2) return nullptr;
    return &*it;
}

SimplifiedPlan zero_plan(const PairJoint& joint, const Distribution& p) {
    return SimplifiedPlan(joint.vocab(), support_entries(joint), p.probs());
}

SimplifiedPlan flow_to_plan(const FlowNetwork& net, const MaxFlowResult& flow,
                            const PairJoint& joint, const Distribution& p) {
    if (net.vocab != joint.vocab() || net.vocab != p.size()) {
        throw std::invalid_argument("flow_to_plan: size mismatch");
    }
    const size_t vocab = net.vocab;

    // Second-slot acceptance from inter-token flows; where transfer inflow
    // exceeds a token's sink outflow (pure pass-through in the witness), the
    // incoming flows are scaled down so the plan stays target-feasible.
    std::vector<double> inter_in(vocab, 0.0);
    for (size_t e = 0; e < net.pair_edges.size(); ++e) {
        inter_in[static_cast<size_t>(net.pair_edges[e].to)] += flow.pair_flow[e];
    }
    std::vector<double> kappa(vocab, 0.0);
    std::vector<double> slot1_budget(vocab, 0.0);  // A1(y)
    for (size_t y = 0; y < vocab; ++y) {
        const double cover = std::min(flow.sink_flow[y], inter_in[y]);
        kappa[y] = inter_in[y] > kTinyMass ? cover / inter_in[y] : 0.0;
        slot1_budget[y] = flow.sink_flow[y] - cover;
    }

    // accept2 indexed by ordered pair, collected per edge.
    std::vector<SimplifiedPlan::Entry> entries = support_entries(joint);
    // Map (x1, x2) -> entry index for edge lookups.
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                  return a.x1 != b.x1 ? a.x1 < b.x1 : a.x2 < b.x2;
              });
    auto entry_index = [&](Token x1, Token x2) -> SimplifiedPlan::Entry* {
        const SimplifiedPlan::Entry probe{x1, x2, 0.0, 0.0, 0.0};
        auto it = std::lower_bound(entries.begin(), entries.end(), probe,
                                   [](const auto& a, const auto& b) {
                                       return a.x1 != b.x1 ? a.x1 < b.x1
                                                           : a.x2 < b.x2;
                                   });
        if (it == entries.end() || it->x1 != x1 || it->x2 != x2) return nullptr;
        return &*it;
    };

    for (size_t e = 0; e < net.pair_edges.size(); ++e) {
        const double f = flow.pair_flow[e];
        if (f <= 0.0) continue;
        const auto& edge = net.pair_edges[e];
        SimplifiedPlan::Entry* entry = entry_index(edge.from, edge.to);
        if (entry == nullptr) {
            throw InternalConsistencyError("flow_to_plan: flow on a zero-mass pair");
        }
        entry->accept2 = f * kappa[static_cast<size_t>(edge.to)];
    }

    // First-slot water filling: distribute each token's remaining sink flow
    // across its pairs by descending leftover capacity.
    std::vector<std::vector<SimplifiedPlan::Entry*>> by_first(vocab);
    for (auto& e : entries) {
        by_first[static_cast<size_t>(e.x1)].push_back(&e);
    }
    for (size_t y = 0; y < vocab; ++y) {
        double remaining = slot1_budget[y];
        if (remaining <= 0.0) continue;
        auto& pairs = by_first[y];
        std::sort(pairs.begin(), pairs.end(), [](const auto* a, const auto* b) {
            return (a->pair_mass - a->accept2) > (b->pair_mass - b->accept2);
        });
        for (auto* e : pairs) {
            if (remaining <= 0.0) break;
            const double room = e->pair_mass - e->accept2 - e->accept1;
            if (room <= 0.0) continue;
            const double take = std::min(room, remaining);
            e->accept1 += take;
            remaining -= take;
        }
        if (remaining > kPlanTolerance) {
            throw InternalConsistencyError(
                "flow_to_plan: first-slot acceptance does not fit pair leftovers");
        }
    }

    return SimplifiedPlan(vocab, std::move(entries), p.probs());
}

double plan_cost(const SimplifiedPlan& plan) { return 1.0 - plan.total_accept(); }

SimplifiedPlan spechub_plan(const Distribution& p, const Distribution& q) {
    const HubQuantities h = hub_quantities(p, q);
    std::vector<SimplifiedPlan::Entry> entries;
    const auto vocab = static_cast<Token>(q.size());
    for (Token x = 0; x < vocab; ++x) {
        if (x == h.a) continue;
        const auto xi = static_cast<size_t>(x);
        if (q[xi] > 0.0) {
            const double hub_share =
                h.sum_col_left > kTinyMass
                    ? h.hub_slot2 * (h.col_left[xi] / h.sum_col_left)
                    : 0.0;
            entries.push_back({x, h.a, q[xi], std::min(p[xi], q[xi]), hub_share});
        }
        if (h.row_mass[xi] > 0.0) {
            const double hub_share =
                h.sum_row_left > kTinyMass
                    ? h.hub_slot1 * (h.row_left[xi] / h.sum_row_left)
                    : 0.0;
            entries.push_back({h.a, x, h.row_mass[xi], hub_share,
                               std::min(h.p_off[xi], h.row_mass[xi])});
        }
    }
    return SimplifiedPlan(q.size(), std::move(entries), p.probs());
}

double optimal_acceptance(const PairJoint& joint, const Distribution& p) {
    return max_flow(build_flow(joint, p)).value;
}

FullCoupling::FullCoupling(size_t vocab, std::vector<double> tensor)
    : vocab_(vocab), tensor_(std::move(tensor)) {
    if (tensor_.size() != vocab_ * vocab_ * vocab_) {
        throw std::invalid_argument("FullCoupling: tensor size mismatch");
    }
}

FullCoupling reconstruct_full_coupling(const SimplifiedPlan& plan,
                                       const PairJoint& joint,
                                       const Distribution& p) {
    const size_t vocab = plan.vocab();
    if (vocab > kMaxCouplingVocab) {
        throw ResourceLimitError("reconstruct_full_coupling: vocabulary too large");
    }
    if (joint.vocab() != vocab || p.size() != vocab) {
        throw std::invalid_argument("reconstruct_full_coupling: size mismatch");
    }

    std::vector<double> residual_share(vocab, 0.0);
    double z = 0.0;
    for (size_t y = 0; y < vocab; ++y) {
        residual_share[y] = std::max(p[y] - plan.accepted_mass()[y], 0.0);
        z += residual_share[y];
    }

    std::vector<double> tensor(vocab * vocab * vocab, 0.0);
    auto at = [&](Token x1, Token x2, Token y) -> double& {
        return tensor[(static_cast<size_t>(x1) * vocab + static_cast<size_t>(x2)) *
                          vocab +
                      static_cast<size_t>(y)];
    };

    for (const auto& e : plan.entries()) {
        at(e.x1, e.x2, e.x1) += e.accept1;
        at(e.x1, e.x2, e.x2) += e.accept2;
        const double leftover = e.pair_mass - e.accept1 - e.accept2;
        if (leftover <= 0.0 || z <= kTinyMass) continue;
        for (size_t y = 0; y < vocab; ++y) {
            if (static_cast<Token>(y) == e.x1 || static_cast<Token>(y) == e.x2) {
                continue;
            }
            at(e.x1, e.x2, static_cast<Token>(y)) +=
                leftover * residual_share[y] / z;
        }
    }
    return FullCoupling(vocab, std::move(tensor));
}

double membership_cost(const FullCoupling& coupling) {
    const size_t vocab = coupling.vocab();
    double cost = 0.0;
    for (size_t x1 = 0; x1 < vocab; ++x1) {
        for (size_t x2 = 0; x2 < vocab; ++x2) {
            for (size_t y = 0; y < vocab; ++y) {
                if (y == x1 || y == x2) continue;
                cost += coupling.at(static_cast<Token>(x1), static_cast<Token>(x2),
                                    static_cast<Token>(y));
            }
        }
    }
    return cost;
}

VerifyOutcome otm_accept_rule(const SimplifiedPlan& plan,
                              std::pair<Token, Token> pair, Rng& rng) {
    const auto* entry = plan.find(pair.first, pair.second);
    if (entry == nullptr || entry->pair_mass <= 0.0) {
        throw std::invalid_argument("otm_accept_rule: pair has zero Q mass");
    }
    const double r1 = std::min(1.0, entry->accept1 / entry->pair_mass);
    if (rng.uniform() < r1) {
        return VerifyOutcome::accept(entry->x1, 1);
    }
    const double rem = entry->pair_mass - entry->accept1;
    const double r2 = rem > kTinyMass ? std::min(1.0, entry->accept2 / rem) : 0.0;
    if (rng.uniform() < r2) {
        return VerifyOutcome::accept(entry->x2, 2);
    }
    std::vector<double> residual_mass(plan.vocab());
    double z = 0.0;
    for (size_t y = 0; y < plan.vocab(); ++y) {
        residual_mass[y] = std::max(plan.target()[y] - plan.accepted_mass()[y], 0.0);
        z += residual_mass[y];
    }
    if (z <= kTinyMass) {
        // Fully covered; rejection here was a rounding artifact.
        return VerifyOutcome::accept(entry->x2, 2);
    }
    const Token bonus = sample_categorical(residual_mass, rng);
    return VerifyOutcome::reject(
        Distribution::from_unnormalized(std::move(residual_mass)), bonus);
}

Distribution otm_rule_exact_output_dist(const SimplifiedPlan& plan) {
    std::vector<double> out(plan.vocab(), 0.0);
    std::vector<double> residual_mass(plan.vocab());
    double z = 0.0;
    for (size_t y = 0; y < plan.vocab(); ++y) {
        residual_mass[y] = std::max(plan.target()[y] - plan.accepted_mass()[y], 0.0);
        z += residual_mass[y];
    }
    for (const auto& e : plan.entries()) {
        if (e.pair_mass <= 0.0) continue;
        const double a1 = std::min(e.accept1, e.pair_mass);
        out[static_cast<size_t>(e.x1)] += a1;
        const double rem = e.pair_mass - a1;
        const double a2 = std::min(e.accept2, rem);
        out[static_cast<size_t>(e.x2)] += a2;
        const double leftover = rem - a2;
        if (leftover <= 0.0) continue;
        if (z <= kTinyMass) {
            out[static_cast<size_t>(e.x2)] += leftover;
            continue;
        }
        for (size_t y = 0; y < plan.vocab(); ++y) {
            out[y] += leftover * residual_mass[y] / z;
        }
    }
    return Distribution(std::move(out));
}

}  // namespace specdec
