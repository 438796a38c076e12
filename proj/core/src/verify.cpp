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

#include "specdec/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specdec {

namespace {

constexpr double kEmptyMass = 1e-12;
constexpr double kUnsampleable = 1e-300;
constexpr double kPruneWeight = 1e-18;
constexpr size_t kMaxEnumVocab = 16;
constexpr int kMaxEnumDrafts = 3;

double accept_ratio(double target, double draft) {
    if (draft < kUnsampleable) return 0.0;
    const double r = target / draft;
    return r >= 1.0 ? 1.0 : (r > 0.0 ? r : 0.0);
}

void check_same_vocab(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("verify: vocabulary size mismatch");
    }
}

void check_token(const Distribution& q, Token x) {
    if (x < 0 || static_cast<size_t>(x) >= q.size()) {
        throw std::invalid_argument("verify: token out of range");
    }
}

}  // namespace

VerifyMethod parse_method(const std::string& name) {
    if (name == "single") return VerifyMethod::kSingle;
    if (name == "rrs") return VerifyMethod::kRrs;
    if (name == "rrsw") return VerifyMethod::kRrsw;
    if (name == "spechub") return VerifyMethod::kSpecHub;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(VerifyMethod method) {
    switch (method) {
        case VerifyMethod::kSingle: return "single";
        case VerifyMethod::kRrs: return "rrs";
        case VerifyMethod::kRrsw: return "rrsw";
        case VerifyMethod::kSpecHub: return "spechub";
    }
    return "unknown";
}

VerifyOutcome single_draft_verify(const Distribution& p, const Distribution& q,
                                  Token x, Rng& rng) {
    check_same_vocab(p, q);
    check_token(q, x);
    const auto xi = static_cast<size_t>(x);
    if (q[xi] < kUnsampleable) {
        throw std::invalid_argument("single_draft_verify: draft has zero mass under q");
    }
    const double ratio = accept_ratio(p[xi], q[xi]);
    if (rng.uniform() < ratio) {
        return VerifyOutcome::accept(x, 1);
    }
    const Residual res = residual(p, q);
    if (res.empty()) {
        // Fully covered: in exact arithmetic the acceptance probability was 1.
        return VerifyOutcome::accept(x, 1);
    }
    const Token bonus = sample_categorical(res.dist->span(), rng);
    return VerifyOutcome::reject(*res.dist, bonus);
}

VerifyOutcome rrs_verify(const Distribution& p, const Distribution& q,
                         std::span<const Token> drafts, bool without_replacement,
                         Rng& rng) {
    check_same_vocab(p, q);
    if (drafts.empty()) {
        throw std::invalid_argument("rrs_verify: no drafts given");
    }
    std::vector<double> p_cur(p.probs());
    std::vector<double> q_cur(q.probs());
    std::vector<double> scratch;

    for (size_t i = 0; i < drafts.size(); ++i) {
        const Token x = drafts[i];
        check_token(q, x);
        const auto xi = static_cast<size_t>(x);
        if (q_cur[xi] < kUnsampleable) {
            throw std::invalid_argument(
                "rrs_verify: draft " + std::to_string(i + 1) +
                " has zero mass under its stage draft distribution");
        }
        const double ratio = accept_ratio(p_cur[xi], q_cur[xi]);
        if (rng.uniform() < ratio) {
            return VerifyOutcome::accept(x, static_cast<int>(i) + 1);
        }
        // Target residual uses the pre-zeroing q of this stage; the
        // without-replacement update to q happens afterwards.
        double mass = 0.0;
        detail::subtract_clamped(p_cur, q_cur, scratch, mass);
        if (mass <= kEmptyMass) {
            // Step fully covered; the rejection was a rounding artifact.
            return VerifyOutcome::accept(x, static_cast<int>(i) + 1);
        }
        for (double& v : scratch) v /= mass;
        p_cur.swap(scratch);
        if (without_replacement) {
            q_cur[xi] = 0.0;
            const double q_mass = std::accumulate(q_cur.begin(), q_cur.end(), 0.0);
            if (q_mass <= kEmptyMass) {
                if (i + 1 < drafts.size()) {
                    throw std::invalid_argument(
                        "rrs_verify: drafts exceed the support of q");
                }
            } else {
                for (double& v : q_cur) v /= q_mass;
            }
        }
    }
    const Token bonus = sample_categorical(p_cur, rng);
    return VerifyOutcome::reject(Distribution::from_unnormalized(std::move(p_cur)),
                                 bonus);
}

HubQuantities hub_quantities(const Distribution& p, const Distribution& q) {
    check_same_vocab(p, q);
    HubQuantities h;
    h.a = top_token(q);
    const auto ai = static_cast<size_t>(h.a);
    h.q_a = q[ai];
    if (h.q_a >= kDegenerateTopMass) {
        throw DegenerateInputError("hub_quantities: q concentrated on one token");
    }
    const size_t vocab = q.size();
    h.row_mass.assign(vocab, 0.0);
    h.p_off.assign(vocab, 0.0);
    h.col_left.assign(vocab, 0.0);
    h.row_left.assign(vocab, 0.0);
    h.bonus_mass.assign(vocab, 0.0);

    const double row_scale = h.q_a / (1.0 - h.q_a);
    for (size_t x = 0; x < vocab; ++x) {
        if (x == ai) continue;
        h.row_mass[x] = row_scale * q[x];
        h.p_off[x] = std::max(p[x] - q[x], 0.0);
        h.col_left[x] = std::max(q[x] - p[x], 0.0);
        h.row_left[x] = std::max(h.row_mass[x] - h.p_off[x], 0.0);
        h.sum_row_left += h.row_left[x];
        h.sum_col_left += h.col_left[x];
    }
    h.hub_slot1 = std::min(p[ai], h.sum_row_left);
    h.p_res_a = std::max(p[ai] - h.sum_row_left, 0.0);
    h.hub_slot2 = std::min(h.p_res_a, h.sum_col_left);

    for (size_t x = 0; x < vocab; ++x) {
        if (x == ai) continue;
        h.bonus_mass[x] = std::max(h.p_off[x] - h.row_mass[x], 0.0);
        h.bonus_total += h.bonus_mass[x];
    }
    // Identically zero in exact arithmetic: the two hub slots emit exactly
    // p(a) between them.
    h.bonus_mass[ai] = std::max(h.p_res_a - h.sum_col_left, 0.0);
    h.bonus_total += h.bonus_mass[ai];
    return h;
}

VerifyOutcome spechub_verify(const Distribution& p, const Distribution& q,
                             std::pair<Token, Token> pair, Rng& rng) {
    const HubQuantities h = hub_quantities(p, q);
    const Token x1 = pair.first;
    const Token x2 = pair.second;
    check_token(q, x1);
    check_token(q, x2);
    if ((x1 == h.a) == (x2 == h.a)) {
        throw std::invalid_argument("spechub_verify: pair must contain the hub exactly once");
    }

    int hub_slot;
    if (x2 == h.a) {
        // Pair (x, a): candidate x at slot 1, hub fallback at slot 2.
        const auto xi = static_cast<size_t>(x1);
        if (q[xi] < kUnsampleable) {
            throw std::invalid_argument("spechub_verify: pair has zero sampling mass");
        }
        if (rng.uniform() < accept_ratio(p[xi], q[xi])) {
            return VerifyOutcome::accept(x1, 1);
        }
        const double hub_ratio = accept_ratio(h.p_res_a, h.sum_col_left);
        if (rng.uniform() < hub_ratio) {
            return VerifyOutcome::accept(h.a, 2);
        }
        hub_slot = 2;
    } else {
        // Pair (a, x): candidate x at slot 2, hub fallback at slot 1.
        const auto xi = static_cast<size_t>(x2);
        if (h.row_mass[xi] < kUnsampleable) {
            throw std::invalid_argument("spechub_verify: pair has zero sampling mass");
        }
        if (rng.uniform() < accept_ratio(h.p_off[xi], h.row_mass[xi])) {
            return VerifyOutcome::accept(x2, 2);
        }
        const double hub_ratio = accept_ratio(p[static_cast<size_t>(h.a)], h.sum_row_left);
        if (rng.uniform() < hub_ratio) {
            return VerifyOutcome::accept(h.a, 1);
        }
        hub_slot = 1;
    }
    if (h.bonus_total <= kEmptyMass) {
        // Fully covered; the hub acceptance above had probability ~1.
        return VerifyOutcome::accept(h.a, hub_slot);
    }
    std::vector<double> bonus(h.bonus_mass);
    const Token bonus_token = sample_categorical(bonus, rng);
    return VerifyOutcome::reject(Distribution::from_unnormalized(std::move(bonus)),
                                 bonus_token);
}

VerifyOutcome spechub_step(const Distribution& p, const Distribution& q, Rng& rng) {
    const Token a = top_token(q);
    if (q[static_cast<size_t>(a)] >= kDegenerateTopMass) {
        return single_draft_verify(p, q, a, rng);
    }
    const auto pair = sample_pair(PairJoint::hub(q), rng);
    return spechub_verify(p, q, pair, rng);
}

RateVector analytic_rates_rrs(const Distribution& p, const Distribution& q, int k) {
    check_same_vocab(p, q);
    if (k < 1) throw std::invalid_argument("analytic_rates_rrs: k must be >= 1");

    RateVector rv;
    rv.per_position.assign(static_cast<size_t>(k), 0.0);
    std::vector<double> p_cur(p.probs());
    std::vector<double> scratch;
    double survive = 1.0;
    for (int i = 0; i < k; ++i) {
        double alpha = 0.0;
        for (size_t x = 0; x < p_cur.size(); ++x) alpha += std::min(p_cur[x], q[x]);
        rv.per_position[static_cast<size_t>(i)] = survive * alpha;
        double mass = 0.0;
        detail::subtract_clamped(p_cur, q.span(), scratch, mass);
        if (mass <= kEmptyMass) break;  // residual exhausted; later slots get 0
        for (double& v : scratch) v /= mass;
        p_cur.swap(scratch);
        survive *= mass;  // mass == 1 - alpha up to rounding
    }
    rv.total = std::accumulate(rv.per_position.begin(), rv.per_position.end(), 0.0);
    return rv;
}

RateVector analytic_rates_spechub(const Distribution& p, const Distribution& q) {
    const HubQuantities h = hub_quantities(p, q);
    double slot1 = h.hub_slot1;
    double slot2 = h.hub_slot2;
    for (size_t x = 0; x < q.size(); ++x) {
        if (static_cast<Token>(x) == h.a) continue;
        slot1 += std::min(p[x], q[x]);
        slot2 += std::min(h.p_off[x], h.row_mass[x]);
    }
    RateVector rv;
    rv.per_position = {slot1, slot2};
    rv.total = slot1 + slot2;
    return rv;
}

double spechub_top_token_rate(const Distribution& p, const Distribution& q) {
    const HubQuantities h = hub_quantities(p, q);
    return h.hub_slot1 + h.hub_slot2;
}

McRates mc_rates(VerifyMethod method, const Distribution& p, const Distribution& q,
                 int k, long long trials, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("mc_rates: trials must be >= 1");
    if (method == VerifyMethod::kSpecHub || method == VerifyMethod::kSingle) {
        k = method == VerifyMethod::kSpecHub ? 2 : 1;
    }
    if (k < 1) throw std::invalid_argument("mc_rates: k must be >= 1");

    std::vector<long long> counts(static_cast<size_t>(k), 0);
    for (long long t = 0; t < trials; ++t) {
        VerifyOutcome outcome = [&] {
            switch (method) {
                case VerifyMethod::kSingle: {
                    const Token x = sample_categorical(q.span(), rng);
                    return single_draft_verify(p, q, x, rng);
                }
                case VerifyMethod::kRrs:
                case VerifyMethod::kRrsw: {
                    const bool wor = method == VerifyMethod::kRrsw;
                    const auto drafts = sample_drafts_rrs(q, k, wor, rng);
                    return rrs_verify(p, q, drafts, wor, rng);
                }
                case VerifyMethod::kSpecHub:
                    return spechub_step(p, q, rng);
            }
            throw std::logic_error("mc_rates: unreachable");
        }();
        if (outcome.accepted) {
            ++counts[static_cast<size_t>(outcome.position - 1)];
        }
    }

    McRates mc;
    mc.trials = trials;
    mc.rates.per_position.resize(static_cast<size_t>(k));
    mc.per_position_se.resize(static_cast<size_t>(k));
    const double n = static_cast<double>(trials);
    for (size_t i = 0; i < counts.size(); ++i) {
        const double f = static_cast<double>(counts[i]) / n;
        mc.rates.per_position[i] = f;
        mc.per_position_se[i] = std::sqrt(f * (1.0 - f) / n);
    }
    mc.rates.total = std::accumulate(mc.rates.per_position.begin(),
                                     mc.rates.per_position.end(), 0.0);
    mc.total_se = std::sqrt(mc.rates.total * std::max(0.0, 1.0 - mc.rates.total) / n);
    return mc;
}

namespace {

struct ExactStats {
    std::vector<double> output;
    RateVector rates;
};

// Depth-first walk over draft tuples; stage s uses scratch buffers indexed
// s+1 so siblings can reuse them.
struct RrsEnumerator {
    const Distribution& q;
    bool wor;
    int k;
    std::vector<std::vector<double>> p_buf;
    std::vector<std::vector<double>> q_buf;
    std::vector<double> out;
    std::vector<double> slots;

    RrsEnumerator(const Distribution& p, const Distribution& q_in, bool wor_in, int k_in)
        : q(q_in), wor(wor_in), k(k_in) {
        const size_t vocab = q.size();
        p_buf.assign(static_cast<size_t>(k) + 1, std::vector<double>(vocab, 0.0));
        q_buf.assign(static_cast<size_t>(k) + 1, std::vector<double>(vocab, 0.0));
        p_buf[0] = p.probs();
        q_buf[0] = q.probs();
        out.assign(vocab, 0.0);
        slots.assign(static_cast<size_t>(k), 0.0);
    }

    void walk(int stage, double weight) {
        const auto s = static_cast<size_t>(stage);
        const auto& p_cur = p_buf[s];
        const auto& q_cur = q_buf[s];
        if (stage == k) {
            for (size_t y = 0; y < out.size(); ++y) out[y] += weight * p_cur[y];
            return;
        }
        for (size_t x = 0; x < q_cur.size(); ++x) {
            const double pick = q_cur[x];
            if (pick <= 0.0) continue;
            const double ratio = accept_ratio(p_cur[x], q_cur[x]);
            const double w_accept = weight * pick * ratio;
            out[x] += w_accept;
            slots[s] += w_accept;
            const double w_reject = weight * pick * (1.0 - ratio);
            if (w_reject <= kPruneWeight) continue;

            auto& p_next = p_buf[s + 1];
            double mass = 0.0;
            for (size_t y = 0; y < p_cur.size(); ++y) {
                const double d = p_cur[y] - q_cur[y];
                p_next[y] = d > 0.0 ? d : 0.0;
                mass += p_next[y];
            }
            if (mass <= 1e-15) continue;  // covered; w_reject is rounding noise
            for (double& v : p_next) v /= mass;

            auto& q_next = q_buf[s + 1];
            q_next = q_cur;
            if (wor) {
                q_next[x] = 0.0;
                const double q_mass =
                    std::accumulate(q_next.begin(), q_next.end(), 0.0);
                if (q_mass <= 1e-15) continue;  // support exhausted
                for (double& v : q_next) v /= q_mass;
            }
            walk(stage + 1, w_reject);
        }
    }
};

ExactStats exact_stats_single(const Distribution& p, const Distribution& q) {
    ExactStats st;
    st.output.assign(p.size(), 0.0);
    st.rates.per_position.assign(1, 0.0);
    double reject_total = 0.0;
    for (size_t x = 0; x < q.size(); ++x) {
        if (q[x] <= 0.0) continue;
        const double ratio = accept_ratio(p[x], q[x]);
        st.output[x] += q[x] * ratio;
        st.rates.per_position[0] += q[x] * ratio;
        reject_total += q[x] * (1.0 - ratio);
    }
    std::vector<double> res;
    double mass = 0.0;
    detail::subtract_clamped(p.span(), q.span(), res, mass);
    if (mass > 1e-15) {
        for (size_t y = 0; y < res.size(); ++y) {
            st.output[y] += reject_total * res[y] / mass;
        }
    }
    st.rates.total = st.rates.per_position[0];
    return st;
}

ExactStats exact_stats_spechub(const Distribution& p, const Distribution& q) {
    const HubQuantities h = hub_quantities(p, q);
    const auto ai = static_cast<size_t>(h.a);
    ExactStats st;
    st.output.assign(p.size(), 0.0);
    st.rates.per_position.assign(2, 0.0);

    const double hub_ratio_col =
        h.sum_col_left > 0.0 ? accept_ratio(h.p_res_a, h.sum_col_left) : 0.0;
    const double hub_ratio_row =
        h.sum_row_left > 0.0 ? accept_ratio(p[ai], h.sum_row_left) : 0.0;

    auto spread_bonus = [&](double weight) {
        if (weight <= kPruneWeight) return;
        if (h.bonus_total <= 1e-15) {
            st.output[ai] += weight;  // matches the sampler's covered fallback
            return;
        }
        for (size_t y = 0; y < st.output.size(); ++y) {
            st.output[y] += weight * h.bonus_mass[y] / h.bonus_total;
        }
    };

    for (size_t x = 0; x < q.size(); ++x) {
        if (x == ai) continue;
        // Pair (x, a), sampled with mass q(x).
        if (q[x] > 0.0) {
            const double w = q[x];
            const double r1 = accept_ratio(p[x], q[x]);
            st.output[x] += w * r1;
            st.rates.per_position[0] += w * r1;
            const double w1 = w * (1.0 - r1);
            st.output[ai] += w1 * hub_ratio_col;
            st.rates.per_position[1] += w1 * hub_ratio_col;
            spread_bonus(w1 * (1.0 - hub_ratio_col));
        }
        // Pair (a, x), sampled with mass Q(a, x).
        if (h.row_mass[x] > 0.0) {
            const double w = h.row_mass[x];
            const double r1 = accept_ratio(h.p_off[x], h.row_mass[x]);
            st.output[x] += w * r1;
            st.rates.per_position[1] += w * r1;
            const double w1 = w * (1.0 - r1);
            st.output[ai] += w1 * hub_ratio_row;
            st.rates.per_position[0] += w1 * hub_ratio_row;
            spread_bonus(w1 * (1.0 - hub_ratio_row));
        }
    }
    st.rates.total =
        st.rates.per_position[0] + st.rates.per_position[1];
    return st;
}

ExactStats exact_stats(VerifyMethod method, const Distribution& p,
                       const Distribution& q, int k) {
    check_same_vocab(p, q);
    switch (method) {
        case VerifyMethod::kSingle:
            return exact_stats_single(p, q);
        case VerifyMethod::kSpecHub:
            if (k != 2) {
                throw std::invalid_argument("exact enumeration: hub scheme uses k = 2");
            }
            if (p.size() > 4096) {
                throw ResourceLimitError("exact enumeration: vocabulary too large");
            }
            return exact_stats_spechub(p, q);
        case VerifyMethod::kRrs:
        case VerifyMethod::kRrsw: {
            if (p.size() > kMaxEnumVocab || k < 1 || k > kMaxEnumDrafts) {
                throw ResourceLimitError(
                    "exact enumeration: instance too large (V <= 16, k <= 3)");
            }
            const bool wor = method == VerifyMethod::kRrsw;
            if (wor) {
                int support = 0;
                for (size_t x = 0; x < q.size(); ++x) {
                    if (q[x] > 0.0) ++support;
                }
                if (support < k) {
                    throw DegenerateInputError(
                        "exact enumeration: support smaller than k");
                }
            }
            RrsEnumerator en(p, q, wor, k);
            en.walk(0, 1.0);
            ExactStats st;
            st.output = std::move(en.out);
            st.rates.per_position = std::move(en.slots);
            st.rates.total = std::accumulate(st.rates.per_position.begin(),
                                             st.rates.per_position.end(), 0.0);
            return st;
        }
    }
    throw std::logic_error("exact_stats: unreachable");
}

}  // namespace

Distribution exact_output_dist(VerifyMethod method, const Distribution& p,
                               const Distribution& q, int k) {
    auto st = exact_stats(method, p, q, k);
    // Deliberately not renormalized: a broken verification path should show
    // up as a mass defect, not be hidden by normalization.
    return Distribution(std::move(st.output));
}

RateVector enumerated_rates(VerifyMethod method, const Distribution& p,
                            const Distribution& q, int k) {
    return exact_stats(method, p, q, k).rates;
}

}  // namespace specdec
