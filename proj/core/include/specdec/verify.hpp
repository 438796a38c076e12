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

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdec/draftjoint.hpp"
#include "specdec/rng.hpp"
#include "specdec/simplex.hpp"

namespace specdec {

/// Result of verifying one group of drafts at a single position.
/// Exactly one of the two states holds: a draft was accepted (token +
/// 1-based slot), or none was and a bonus token was sampled from the final
/// residual distribution.
struct VerifyOutcome {
    std::optional<Token> accepted;
    int position = 0;                      // 1-based slot, set iff accepted
    std::optional<Distribution> residual;  // set iff no draft accepted
    Token bonus = -1;                      // set iff no draft accepted

    static VerifyOutcome accept(Token token, int slot) {
        VerifyOutcome out;
        out.accepted = token;
        out.position = slot;
        return out;
    }

    static VerifyOutcome reject(Distribution residual_dist, Token bonus_token) {
        VerifyOutcome out;
        out.residual = std::move(residual_dist);
        out.bonus = bonus_token;
        return out;
    }

    /// The token this step emits: the accepted draft or the bonus sample.
    Token emitted() const { return accepted ? *accepted : bonus; }
};

/// Per-slot acceptance probabilities; total = sum over slots, <= 1.
struct RateVector {
    std::vector<double> per_position;
    double total = 0.0;
};

/// RateVector estimated by Monte Carlo, with binomial standard errors.
struct McRates {
    RateVector rates;
    std::vector<double> per_position_se;
    double total_se = 0.0;
    long long trials = 0;
};

enum class VerifyMethod { kSingle, kRrs, kRrsw, kSpecHub };

VerifyMethod parse_method(const std::string& name);
std::string method_name(VerifyMethod method);

/// Classic single-draft rejection sampling: accept x with probability
/// min(1, p(x)/q(x)); on rejection return the residual and a bonus sample
/// from it. q(x) must be positive (the draft could not have been sampled
/// otherwise).
VerifyOutcome single_draft_verify(const Distribution& p, const Distribution& q,
                                  Token x, Rng& rng);

/// Recursive rejection sampling over k drafts. The target shrinks to its
/// residual after every rejection; under `without_replacement` the draft
/// distribution additionally zeroes each rejected token and renormalizes
/// (after the residual update, in that order).
VerifyOutcome rrs_verify(const Distribution& p, const Distribution& q,
                         std::span<const Token> drafts, bool without_replacement,
                         Rng& rng);

/// Deterministic per-(p, q) quantities of the hub construction; shared by
/// the hub verifier, its analytic rates, and the enumeration oracle.
///
/// Conventions, with a the hub token and x ranging over non-hub tokens:
///   row_mass[x]  = Q(a, x) = q(a) q(x) / (1 - q(a))
///   p_off[x]     = max(p(x) - q(x), 0)      second-slot target for x
///   col_left[x]  = max(q(x) - p(x), 0)      pair (x, a) mass left after slot 1
///   row_left[x]  = max(Q(a, x) - p_off[x], 0)  pair (a, x) mass left after slot 2
///   hub_slot1    = min(p(a), sum row_left)  hub accepted within (a, x) pairs
///   p_res_a      = max(p(a) - sum row_left, 0)
///   hub_slot2    = min(p_res_a, sum col_left)  hub accepted within (x, a) pairs
///   bonus_mass[x] = max(p_off[x] - Q(a, x), 0), bonus_mass[a] = residual of a
/// The hub acceptance within (a, x) pairs intentionally uses p(a) while the
/// (x, a) side uses the leftover p_res_a; the two together emit the hub with
/// total probability exactly p(a).
struct HubQuantities {
    Token a = -1;
    double q_a = 0.0;
    std::vector<double> row_mass;
    std::vector<double> p_off;
    std::vector<double> col_left;
    std::vector<double> row_left;
    double sum_row_left = 0.0;
    double sum_col_left = 0.0;
    double hub_slot1 = 0.0;
    double p_res_a = 0.0;
    double hub_slot2 = 0.0;
    std::vector<double> bonus_mass;
    double bonus_total = 0.0;
};

HubQuantities hub_quantities(const Distribution& p, const Distribution& q);

/// Hub verification of a pair sampled from PairJoint::hub(q). The pair must
/// contain the hub token in exactly one slot.
VerifyOutcome spechub_verify(const Distribution& p, const Distribution& q,
                             std::pair<Token, Token> pair, Rng& rng);

/// Full hub step: sample a pair from the hub joint, then verify. When q is
/// concentrated on one token the step degrades to single-draft verification
/// of that token, preserving the output marginal.
VerifyOutcome spechub_step(const Distribution& p, const Distribution& q, Rng& rng);

/// Closed-form per-slot acceptance rates of recursive rejection sampling
/// with replacement: slot i accepts with probability
/// prod_{j<i}(1 - a_j) * overlap(p_i, q) for the running residual p_i.
RateVector analytic_rates_rrs(const Distribution& p, const Distribution& q, int k);

/// Closed-form two-slot rates of the hub scheme.
RateVector analytic_rates_spechub(const Distribution& p, const Distribution& q);

/// Probability that a hub step emits the hub token from either slot;
/// equals p(a) identically.
double spechub_top_token_rate(const Distribution& p, const Distribution& q);

/// Monte-Carlo per-slot acceptance frequencies over `trials` independent
/// verification runs. kSingle behaves as kRrs with k = 1.
McRates mc_rates(VerifyMethod method, const Distribution& p, const Distribution& q,
                 int k, long long trials, Rng& rng);

/// Exact marginal output distribution, obtained by enumerating every draft
/// tuple and acceptance branch with closed-form probabilities (no sampling).
/// This is the correctness oracle for all verification paths; it requires a
/// small instance (V <= 16 and k <= 3 for kRrs/kRrsw).
Distribution exact_output_dist(VerifyMethod method, const Distribution& p,
                               const Distribution& q, int k);

/// Exact per-slot acceptance probabilities from the same enumeration.
RateVector enumerated_rates(VerifyMethod method, const Distribution& p,
                            const Distribution& q, int k);

}  // namespace specdec
