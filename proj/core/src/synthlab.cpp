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

#include "specdec/synthlab.hpp"

#include <cmath>

#include "specdec/coupling.hpp"
#include "specdec/draftjoint.hpp"
#include "specdec/rng.hpp"
#include "specdec/verify.hpp"

namespace specdec {

namespace {

/// Kahan-compensated accumulator with a running second moment; aggregation
/// stays order-independent at the 1 ulp level.
class OnlineStats {
public:
    void add(double x) {
        accumulate(sum_, comp_sum_, x);
        accumulate(sum_sq_, comp_sq_, x * x);
        ++n_;
    }

    double mean() const { return n_ > 0 ? sum_ / static_cast<double>(n_) : 0.0; }

    double std_error() const {
        if (n_ < 2) return 0.0;
        const double n = static_cast<double>(n_);
        const double var = std::max(0.0, (sum_sq_ - sum_ * sum_ / n) / (n - 1.0));
        return std::sqrt(var / n);
    }

private:
    static void accumulate(double& sum, double& comp, double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    double sum_ = 0.0, comp_sum_ = 0.0;
    double sum_sq_ = 0.0, comp_sq_ = 0.0;
    long long n_ = 0;
};

void validate(const ToyConfig& cfg) {
    if (!(cfg.temperature > 0.0)) {
        throw std::invalid_argument("ToyConfig: T must be positive");
    }
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
        throw std::invalid_argument("ToyConfig: lambda must be in [0, 1]");
    }
    if (cfg.vocab < 2) {
        throw std::invalid_argument("ToyConfig: vocab must be >= 2");
    }
    if (cfg.n_pairs < 1) {
        throw std::invalid_argument("ToyConfig: n_pairs must be >= 1");
    }
    if (cfg.mc_trials < 1) {
        throw std::invalid_argument("ToyConfig: mc_trials must be >= 1");
    }
}

constexpr uint64_t kRrswStreamTag = 0x5252537721ULL;

/// Standard normal addressed by counters (Box-Muller over two uniforms).
double counter_gaussian(uint64_t seed, uint64_t key1, uint64_t key2,
                        uint64_t which, uint64_t slot) {
    const double u1 =
        std::max(counter_uniform(seed, key1, key2, 2 * which, slot), 0x1.0p-53);
    const double u2 = counter_uniform(seed, key1, key2, 2 * which + 1, slot);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

std::pair<Distribution, Distribution> synth_pair(double temperature, double lambda,
                                                 size_t vocab, uint64_t seed,
                                                 uint64_t key1, uint64_t key2) {
    std::vector<double> target_logits(vocab);
    std::vector<double> draft_logits(vocab);
    for (size_t s = 0; s < vocab; ++s) {
        const double u_p = counter_gaussian(seed, key1, key2, 0, s);
        const double u_q = counter_gaussian(seed, key1, key2, 1, s);
        target_logits[s] = u_p;
        draft_logits[s] = lambda * u_p + (1.0 - lambda) * u_q;
    }
    return {softmax_with_temperature(Logits(std::move(target_logits)), temperature),
            softmax_with_temperature(Logits(std::move(draft_logits)), temperature)};
}

std::pair<Distribution, Distribution> gen_toy_pair(const ToyConfig& cfg,
                                                   uint64_t index) {
    validate(cfg);
    return synth_pair(cfg.temperature, cfg.lambda, cfg.vocab, cfg.seed, index, 0);
}

std::vector<ToyRow> toy_experiment(const ToyConfig& cfg) {
    validate(cfg);
    enum { kRrs = 0, kRrswIdx, kOtm, kOtmw, kHub, kCount };
    const char* labels[kCount] = {"RRS", "RRSw", "OTM", "OTMw", "SpecHub"};
    OnlineStats stats[kCount];
    int fallbacks[kCount] = {0, 0, 0, 0, 0};

    for (int i = 0; i < cfg.n_pairs; ++i) {
        const auto [p, q] = gen_toy_pair(cfg, static_cast<uint64_t>(i));
        const double alpha = overlap(p, q);

        stats[kRrs].add(analytic_rates_rrs(p, q, 2).total);

        Rng rrsw_rng(derive_seed(cfg.seed, kRrswStreamTag, static_cast<uint64_t>(i)));
        double rrsw_total;
        try {
            rrsw_total =
                mc_rates(VerifyMethod::kRrsw, p, q, 2, cfg.mc_trials, rrsw_rng)
                    .rates.total;
        } catch (const DegenerateInputError&) {
            rrsw_total = alpha;
            ++fallbacks[kRrswIdx];
        }
        stats[kRrswIdx].add(rrsw_total);

        stats[kOtm].add(optimal_acceptance(PairJoint::independent(q), p));

        double otmw_total;
        try {
            otmw_total = optimal_acceptance(PairJoint::without_replacement(q), p);
        } catch (const DegenerateInputError&) {
            otmw_total = alpha;  // one draw is all the support offers
            ++fallbacks[kOtmw];
        }
        stats[kOtmw].add(otmw_total);

        double hub_total;
        try {
            hub_total = analytic_rates_spechub(p, q).total;
        } catch (const DegenerateInputError&) {
            hub_total = alpha;
            ++fallbacks[kHub];
        }
        stats[kHub].add(hub_total);
    }

    std::vector<ToyRow> rows;
    rows.reserve(kCount);
    for (int m = 0; m < kCount; ++m) {
        ToyRow row;
        row.method = labels[m];
        row.mean = stats[m].mean();
        row.std_error = stats[m].std_error();
        row.fallbacks = fallbacks[m];
        row.config = cfg;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<DecayRow> decay_experiment(const ToyConfig& cfg, int k_max) {
    validate(cfg);
    if (k_max < 1 || static_cast<size_t>(k_max) > cfg.vocab) {
        throw std::invalid_argument("decay_experiment: need 1 <= k_max <= vocab");
    }
    const auto k = static_cast<size_t>(k_max);
    std::vector<OnlineStats> rrs(k), rrsw(k);
    OnlineStats hub[2];

    for (int i = 0; i < cfg.n_pairs; ++i) {
        const auto [p, q] = gen_toy_pair(cfg, static_cast<uint64_t>(i));

        const RateVector analytic = analytic_rates_rrs(p, q, k_max);
        for (size_t pos = 0; pos < k; ++pos) {
            rrs[pos].add(analytic.per_position[pos]);
        }

        Rng rrsw_rng(derive_seed(cfg.seed, kRrswStreamTag, static_cast<uint64_t>(i)));
        try {
            const McRates mc =
                mc_rates(VerifyMethod::kRrsw, p, q, k_max, cfg.mc_trials, rrsw_rng);
            for (size_t pos = 0; pos < k; ++pos) {
                rrsw[pos].add(mc.rates.per_position[pos]);
            }
        } catch (const DegenerateInputError&) {
            rrsw[0].add(overlap(p, q));
            for (size_t pos = 1; pos < k; ++pos) rrsw[pos].add(0.0);
        }

        try {
            const RateVector hub_rates = analytic_rates_spechub(p, q);
            hub[0].add(hub_rates.per_position[0]);
            hub[1].add(hub_rates.per_position[1]);
        } catch (const DegenerateInputError&) {
            hub[0].add(overlap(p, q));
            hub[1].add(0.0);
        }
    }

    std::vector<DecayRow> rows;
    for (size_t pos = 0; pos < k; ++pos) {
        rows.push_back({"RRS", static_cast<int>(pos) + 1, rrs[pos].mean(),
                        rrs[pos].std_error()});
    }
    for (size_t pos = 0; pos < k; ++pos) {
        rows.push_back({"RRSw", static_cast<int>(pos) + 1, rrsw[pos].mean(),
                        rrsw[pos].std_error()});
    }
    for (int pos = 0; pos < 2; ++pos) {
        rows.push_back({"SpecHub", pos + 1, hub[pos].mean(), hub[pos].std_error()});
    }
    return rows;
}

}  // namespace specdec
