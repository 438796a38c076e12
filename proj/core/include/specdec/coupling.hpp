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

#include <utility>
#include <vector>

#include "specdec/draftjoint.hpp"
#include "specdec/simplex.hpp"
#include "specdec/verify.hpp"

namespace specdec {

/// Capacity graph whose maximum s-t flow equals the optimal two-draft
/// acceptance probability: s feeds each token v with the first-draft
/// marginal of Q, v drains into t with capacity p(v), and an edge u -> v of
/// capacity Q(u, v) lets the pair (u, v) hand its mass to its second token.
struct FlowNetwork {
    struct PairEdge {
        Token from;
        Token to;
        double cap;
    };

    size_t vocab = 0;
    std::vector<double> source_cap;  // g(s, v) = sum_x2 Q(v, x2)
    std::vector<double> sink_cap;    // g(v, t) = p(v)
    std::vector<PairEdge> pair_edges;  // g(u, v) = Q(u, v), u != v
};

FlowNetwork build_flow(const PairJoint& joint, const Distribution& p);

struct MaxFlowResult {
    double value = 0.0;
    std::vector<double> source_flow;
    std::vector<double> sink_flow;
    std::vector<double> pair_flow;  // aligned with FlowNetwork::pair_edges
};

/// Exact maximum flow. Capacities are snapped to an integer grid of 2^-48
/// before solving so the augmenting scheme terminates with exact optimality;
/// the result is rescaled to probabilities (error below 1e-11 for any
/// desk-scale edge count).
MaxFlowResult max_flow(const FlowNetwork& net);

/// Acceptance entries of the k = 2 transport plan, restricted to the support
/// of Q: accept1 = pi(x1, x2, y=x1), accept2 = pi(x1, x2, y=x2).
class SimplifiedPlan {
public:
    struct Entry {
        Token x1;
        Token x2;
        double pair_mass;  // Q(x1, x2)
        double accept1;
        double accept2;
    };

    /// Validates plan invariants (non-negative entries, accept1 + accept2 <=
    /// Q entrywise, per-token acceptance <= p(y), all within 1e-9).
    SimplifiedPlan(size_t vocab, std::vector<Entry> entries,
                   std::vector<double> target);

    size_t vocab() const { return vocab_; }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<double>& target() const { return target_; }

    /// A(y): total plan mass that accepts token y (either slot).
    const std::vector<double>& accepted_mass() const { return accepted_mass_; }

    double total_accept() const { return total_accept_; }

    /// Entry for an ordered pair, or nullptr if the pair has no Q mass.
    const Entry* find(Token x1, Token x2) const;

private:
    size_t vocab_ = 0;
    std::vector<Entry> entries_;  // sorted by (x1, x2)
    std::vector<double> target_;
    std::vector<double> accepted_mass_;
    double total_accept_ = 0.0;
};

/// Plan with all acceptance entries zero over the support of Q.
SimplifiedPlan zero_plan(const PairJoint& joint, const Distribution& p);

/// Turns a max-flow witness into a feasible plan of the same total
/// acceptance. Second-slot acceptance follows the inter-token flows (scaled
/// down where flow merely passes through a token); the remaining sink flow
/// of each token is distributed as first-slot acceptance across that token's
/// pairs by water filling over descending leftover capacity.
SimplifiedPlan flow_to_plan(const FlowNetwork& net, const MaxFlowResult& flow,
                            const PairJoint& joint, const Distribution& p);

/// 1 - total accepted mass.
double plan_cost(const SimplifiedPlan& plan);

/// The closed-form hub transport plan on the hub-sparse support.
SimplifiedPlan spechub_plan(const Distribution& p, const Distribution& q);

/// Optimal acceptance probability of (Q, p): max-flow value of build_flow.
double optimal_acceptance(const PairJoint& joint, const Distribution& p);

/// Dense pi(x1, x2, y), materialized only for small vocabularies.
class FullCoupling {
public:
    FullCoupling(size_t vocab, std::vector<double> tensor);

    size_t vocab() const { return vocab_; }
    double at(Token x1, Token x2, Token y) const {
        return tensor_[(static_cast<size_t>(x1) * vocab_ + static_cast<size_t>(x2)) *
                           vocab_ +
                       static_cast<size_t>(y)];
    }
    const std::vector<double>& tensor() const { return tensor_; }

private:
    size_t vocab_ = 0;
    std::vector<double> tensor_;
};

constexpr size_t kMaxCouplingVocab = 16;

/// Fills the off-draft entries of the full coupling from a plan: each pair's
/// leftover mass is spread over target tokens y not in the pair,
/// proportionally to their unallocated target mass. Valid (both marginals
/// match) whenever the plan saturates every pair-with-leftover's tokens,
/// which any optimal plan does.
FullCoupling reconstruct_full_coupling(const SimplifiedPlan& plan,
                                       const PairJoint& joint,
                                       const Distribution& p);

/// Expected rejection indicator: total mass on entries with y not in the pair.
double membership_cost(const FullCoupling& coupling);

/// Executes a plan as a sequential verifier for one sampled pair: accept
/// slot 1 with probability accept1/Q, then slot 2 with accept2/(Q - accept1),
/// else sample the bonus from the unallocated target mass norm(p - A).
VerifyOutcome otm_accept_rule(const SimplifiedPlan& plan,
                              std::pair<Token, Token> pair, Rng& rng);

/// Exact output marginal of otm_accept_rule under pairs drawn from the
/// plan's Q support (enumeration, no sampling); equals p for feasible plans.
Distribution otm_rule_exact_output_dist(const SimplifiedPlan& plan);

}  // namespace specdec
