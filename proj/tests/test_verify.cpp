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

#include <cmath>

#include <gtest/gtest.h>

#include "specdec/verify.hpp"

namespace specdec {
namespace {

const Distribution kTargetP({0.1, 0.6, 0.3});
const Distribution kDraftQ({0.5, 0.3, 0.2});

Distribution random_dist(Rng& rng, size_t vocab) {
    std::vector<double> mass(vocab);
    for (double& v : mass) v = rng.uniform() + 1e-9;
    return Distribution::from_unnormalized(std::move(mass));
}

TEST(SingleDraft, AlwaysAcceptsWhenEqual) {
    Rng rng(1);
    const Distribution p({0.3, 0.7});
    for (int i = 0; i < 100; ++i) {
        const auto outcome = single_draft_verify(p, p, 1, rng);
        ASSERT_TRUE(outcome.accepted.has_value());
        EXPECT_EQ(*outcome.accepted, 1);
        EXPECT_EQ(outcome.position, 1);
    }
}

TEST(SingleDraft, NeverAcceptsZeroTargetMass) {
    Rng rng(2);
    const Distribution p({0.0, 1.0});
    const Distribution q({0.5, 0.5});
    for (int i = 0; i < 100; ++i) {
        const auto outcome = single_draft_verify(p, q, 0, rng);
        EXPECT_FALSE(outcome.accepted.has_value());
        EXPECT_EQ(outcome.bonus, 1);  // residual is all on token 1
        ASSERT_TRUE(outcome.residual.has_value());
        EXPECT_NEAR((*outcome.residual)[1], 1.0, 1e-12);
    }
}

TEST(SingleDraft, UndersampledTokenAlwaysAccepted) {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto outcome = single_draft_verify(kTargetP, kDraftQ, 1, rng);
        ASSERT_TRUE(outcome.accepted.has_value());  // p(1)=0.6 > q(1)=0.3
    }
}

TEST(SingleDraft, RejectsUnsampleableDraft) {
    Rng rng(4);
    EXPECT_THROW(
        single_draft_verify(Distribution({0.5, 0.5}), Distribution({1.0, 0.0}), 1, rng),
        std::invalid_argument);
}

TEST(RrsVerify, SingleDraftReduction) {
    // k = 1 consumes randomness identically to single_draft_verify.
    Rng gen(5);
    for (int it = 0; it < 100; ++it) {
        const auto p = random_dist(gen, 8);
        const auto q = random_dist(gen, 8);
        Rng pick(static_cast<uint64_t>(it) * 13 + 1);
        const Token x = sample_categorical(q.span(), pick);
        Rng r1(static_cast<uint64_t>(it) + 100);
        Rng r2(static_cast<uint64_t>(it) + 100);
        const std::vector<Token> drafts{x};
        const auto a = single_draft_verify(p, q, x, r1);
        const auto b = rrs_verify(p, q, drafts, false, r2);
        EXPECT_EQ(a.accepted, b.accepted);
        EXPECT_EQ(a.position, b.position);
        if (!a.accepted) EXPECT_EQ(a.bonus, b.bonus);
    }
}

TEST(RrsVerify, OneHotTargetAcceptsItsToken) {
    Rng rng(6);
    const Distribution p({0.0, 0.0, 1.0});
    const Distribution q({0.2, 0.3, 0.5});
    const std::vector<Token> drafts{2, 0};
    for (int i = 0; i < 100; ++i) {
        const auto outcome = rrs_verify(p, q, drafts, false, rng);
        ASSERT_TRUE(outcome.accepted.has_value());
        EXPECT_EQ(*outcome.accepted, 2);
        EXPECT_EQ(outcome.position, 1);
    }
}

TEST(RrsVerify, TooManyDraftsForSupport) {
    // q supports two tokens, both certain to be rejected (p lives on token
    // 2); the third draft finds an empty draft distribution.
    Rng rng(7);
    const Distribution p({0.0, 0.0, 1.0});
    const Distribution q({0.5, 0.5, 0.0});
    const std::vector<Token> drafts{0, 1, 0};
    EXPECT_THROW(rrs_verify(p, q, drafts, true, rng), std::invalid_argument);
}

TEST(AnalyticRrs, WorkedInstance) {
    const auto rates = analytic_rates_rrs(kTargetP, kDraftQ, 2);
    ASSERT_EQ(rates.per_position.size(), 2u);
    EXPECT_NEAR(rates.per_position[0], 0.6, 1e-12);
    EXPECT_NEAR(rates.per_position[1], 0.2, 1e-12);
    EXPECT_NEAR(rates.total, 0.8, 1e-12);
}

TEST(AnalyticRrs, IdenticalDistributions) {
    const Distribution p({0.2, 0.8});
    const auto rates = analytic_rates_rrs(p, p, 4);
    EXPECT_NEAR(rates.per_position[0], 1.0, 1e-12);
    for (size_t i = 1; i < 4; ++i) EXPECT_NEAR(rates.per_position[i], 0.0, 1e-12);
}

TEST(AnalyticRrs, SecondSlotClosedForm) {
    // slot2 == sum_x min(p(x) - min(p(x),q(x)), (1-alpha) q(x)).
    Rng rng(8);
    for (int it = 0; it < 500; ++it) {
        const auto p = random_dist(rng, 10);
        const auto q = random_dist(rng, 10);
        const double alpha = overlap(p, q);
        double expected = 0.0;
        for (size_t x = 0; x < 10; ++x) {
            expected += std::min(p[x] - std::min(p[x], q[x]), (1.0 - alpha) * q[x]);
        }
        const auto rates = analytic_rates_rrs(p, q, 2);
        EXPECT_NEAR(rates.per_position[1], expected, 1e-12);
    }
}

TEST(AnalyticRrs, SurvivalProductNonIncreasing) {
    Rng rng(9);
    for (int it = 0; it < 200; ++it) {
        const auto p = random_dist(rng, 12);
        const auto q = random_dist(rng, 12);
        const auto rates = analytic_rates_rrs(p, q, 10);
        double survive = 1.0;
        for (double r : rates.per_position) {
            const double next = survive - r;
            EXPECT_LE(next, survive + 1e-12);
            EXPECT_GE(next, -1e-9);
            survive = next;
        }
    }
}

TEST(AnalyticSpecHub, WorkedInstance) {
    const auto rates = analytic_rates_spechub(kTargetP, kDraftQ);
    ASSERT_EQ(rates.per_position.size(), 2u);
    EXPECT_NEAR(rates.per_position[0], 0.6, 1e-12);
    EXPECT_NEAR(rates.per_position[1], 0.4, 1e-12);  // 0.3 + 0.1 off-hub
    EXPECT_NEAR(rates.total, 1.0, 1e-12);
    EXPECT_NEAR(spechub_top_token_rate(kTargetP, kDraftQ), 0.1, 1e-12);
}

TEST(AnalyticSpecHub, IdenticalDistributionsAcceptEverything) {
    const Distribution p({0.5, 0.3, 0.2});
    const auto rates = analytic_rates_spechub(p, p);
    EXPECT_NEAR(rates.total, 1.0, 1e-12);
}

TEST(AnalyticSpecHub, TopTokenRateEqualsTarget) {
    // The hub is emitted with probability exactly p(a).
    Rng rng(10);
    for (int it = 0; it < 1000; ++it) {
        const size_t vocab = 2 + static_cast<size_t>(rng.uniform() * 15);
        const auto p = random_dist(rng, vocab);
        const auto q = random_dist(rng, vocab);
        const Token a = top_token(q);
        EXPECT_NEAR(spechub_top_token_rate(p, q), p[static_cast<size_t>(a)], 1e-12);
    }
}

TEST(AnalyticSpecHub, SecondSlotDominatesRrsUnderConcentration) {
    Rng rng(11);
    int conditioned = 0;
    for (int it = 0; it < 10000; ++it) {
        const size_t vocab = 2 + static_cast<size_t>(rng.uniform() * 15);
        const auto p = random_dist(rng, vocab);
        const auto q = random_dist(rng, vocab);
        const double q_a = q[static_cast<size_t>(top_token(q))];
        const double alpha = overlap(p, q);
        if (q_a / (1.0 - q_a) <= 1.0 - alpha) continue;
        ++conditioned;
        const double hub_slot2 = analytic_rates_spechub(p, q).per_position[1];
        const double rrs_slot2 = analytic_rates_rrs(p, q, 2).per_position[1];
        EXPECT_GE(hub_slot2, rrs_slot2 - 1e-12);
    }
    EXPECT_GT(conditioned, 1000);
}

TEST(SpecHubVerify, EqualDistributionsAcceptSlotOne) {
    Rng rng(12);
    const Distribution p({0.5, 0.3, 0.2});
    for (int i = 0; i < 100; ++i) {
        const auto outcome = spechub_verify(p, p, {1, 0}, rng);
        ASSERT_TRUE(outcome.accepted.has_value());
        EXPECT_EQ(*outcome.accepted, 1);
        EXPECT_EQ(outcome.position, 1);
    }
}

TEST(SpecHubVerify, ZeroHubTargetNeverEmitsHub) {
    Rng rng(13);
    const Distribution p({0.0, 0.6, 0.4});
    const Distribution q({0.5, 0.3, 0.2});  // hub = 0, p(hub) = 0
    for (int i = 0; i < 200; ++i) {
        const auto outcome = spechub_verify(p, q, {0, 1}, rng);
        if (outcome.accepted) EXPECT_NE(*outcome.accepted, 0);
    }
}

TEST(SpecHubVerify, RejectsPairsNotIncidentToHub) {
    Rng rng(14);
    EXPECT_THROW(spechub_verify(kTargetP, kDraftQ, {1, 2}, rng),
                 std::invalid_argument);
    EXPECT_THROW(spechub_verify(kTargetP, kDraftQ, {0, 0}, rng),
                 std::invalid_argument);
}

TEST(SpecHubStep, DegenerateDraftFallsBackToSingleDraft) {
    Rng rng(15);
    std::vector<double> q(3, 0.0);
    q[1] = 1.0;
    const Distribution p({0.3, 0.2, 0.5});
    int accepts = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto outcome = spechub_step(p, Distribution(q), rng);
        if (outcome.accepted) {
            EXPECT_EQ(*outcome.accepted, 1);
            ++accepts;
        }
    }
    EXPECT_NEAR(static_cast<double>(accepts) / n, 0.2, 0.01);  // min(1, p(1)/1)
}

TEST(ExactOutput, EqualDistributionsForAllMethods) {
    const Distribution p({0.25, 0.5, 0.25});
    for (auto method : {VerifyMethod::kSingle, VerifyMethod::kRrs,
                        VerifyMethod::kRrsw, VerifyMethod::kSpecHub}) {
        const int k = method == VerifyMethod::kSingle ? 1 : 2;
        const auto out = exact_output_dist(method, p, p, k);
        for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(out[i], p[i], 1e-12);
    }
}

TEST(ExactOutput, SpecHubWorkedInstanceIsExact) {
    const auto out = exact_output_dist(VerifyMethod::kSpecHub, kTargetP, kDraftQ, 2);
    EXPECT_NEAR(out[0], 0.1, 1e-12);
    EXPECT_NEAR(out[1], 0.6, 1e-12);
    EXPECT_NEAR(out[2], 0.3, 1e-12);
}

TEST(ExactOutput, RandomInstancesMatchTarget) {
    Rng rng(16);
    for (int it = 0; it < 200; ++it) {
        const size_t vocab = 2 + static_cast<size_t>(rng.uniform() * 15);
        const auto p = random_dist(rng, vocab);
        const auto q = random_dist(rng, vocab);
        for (auto method : {VerifyMethod::kSingle, VerifyMethod::kRrs,
                            VerifyMethod::kRrsw, VerifyMethod::kSpecHub}) {
            const int k = method == VerifyMethod::kSingle ? 1 : 2;
            const auto out = exact_output_dist(method, p, q, k);
            for (size_t i = 0; i < vocab; ++i) {
                ASSERT_NEAR(out[i], p[i], 1e-9)
                    << method_name(method) << " vocab " << vocab << " token " << i;
            }
        }
    }
}

TEST(ExactOutput, ThreeDraftInstancesMatchTarget) {
    Rng rng(17);
    for (int it = 0; it < 100; ++it) {
        const auto p = random_dist(rng, 8);
        const auto q = random_dist(rng, 8);
        for (auto method : {VerifyMethod::kRrs, VerifyMethod::kRrsw}) {
            const auto out = exact_output_dist(method, p, q, 3);
            for (size_t i = 0; i < 8; ++i) ASSERT_NEAR(out[i], p[i], 1e-9);
        }
    }
}

TEST(ExactOutput, OversizeInstanceRaisesResourceLimit) {
    Rng rng(18);
    const auto p = random_dist(rng, 32);
    const auto q = random_dist(rng, 32);
    EXPECT_THROW(exact_output_dist(VerifyMethod::kRrs, p, q, 2), ResourceLimitError);
    const auto p16 = random_dist(rng, 16);
    const auto q16 = random_dist(rng, 16);
    EXPECT_THROW(exact_output_dist(VerifyMethod::kRrs, p16, q16, 4),
                 ResourceLimitError);
}

TEST(EnumeratedRates, MatchAnalyticWhereClosedFormsExist) {
    Rng rng(19);
    for (int it = 0; it < 200; ++it) {
        const auto p = random_dist(rng, 9);
        const auto q = random_dist(rng, 9);
        const auto rrs_enum = enumerated_rates(VerifyMethod::kRrs, p, q, 2);
        const auto rrs_analytic = analytic_rates_rrs(p, q, 2);
        EXPECT_NEAR(rrs_enum.per_position[0], rrs_analytic.per_position[0], 1e-10);
        EXPECT_NEAR(rrs_enum.per_position[1], rrs_analytic.per_position[1], 1e-10);
        const auto hub_enum = enumerated_rates(VerifyMethod::kSpecHub, p, q, 2);
        const auto hub_analytic = analytic_rates_spechub(p, q);
        EXPECT_NEAR(hub_enum.per_position[0], hub_analytic.per_position[0], 1e-10);
        EXPECT_NEAR(hub_enum.per_position[1], hub_analytic.per_position[1], 1e-10);
    }
}

TEST(McRates, AgreesWithAnalyticRrs) {
    Rng rng(20);
    const auto mc = mc_rates(VerifyMethod::kRrs, kTargetP, kDraftQ, 2, 100000, rng);
    EXPECT_NEAR(mc.rates.total, 0.8, 4.0 * mc.total_se + 1e-9);
    EXPECT_NEAR(mc.rates.per_position[0], 0.6, 4.0 * mc.per_position_se[0] + 1e-9);
}

TEST(McRates, AgreesWithAnalyticSpecHub) {
    Rng rng(21);
    const auto p = Distribution({0.15, 0.25, 0.35, 0.25});
    const auto q = Distribution({0.4, 0.3, 0.2, 0.1});
    const auto analytic = analytic_rates_spechub(p, q);
    const auto mc = mc_rates(VerifyMethod::kSpecHub, p, q, 2, 100000, rng);
    for (size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(mc.rates.per_position[i], analytic.per_position[i],
                    4.0 * mc.per_position_se[i] + 1e-9);
    }
}

TEST(McRates, RrswWorkedInstanceCost) {
    // The worked instance loses 0.06 of acceptance under RRSw.
    Rng rng(22);
    const auto mc = mc_rates(VerifyMethod::kRrsw, kTargetP, kDraftQ, 2, 100000, rng);
    EXPECT_NEAR(mc.rates.total, 0.94, 0.01);
}

TEST(McRates, RrswMatchesEnumeration) {
    Rng rng(23);
    const auto p = Distribution({0.15, 0.25, 0.35, 0.25});
    const auto q = Distribution({0.4, 0.3, 0.2, 0.1});
    const auto exact = enumerated_rates(VerifyMethod::kRrsw, p, q, 2);
    const auto mc = mc_rates(VerifyMethod::kRrsw, p, q, 2, 100000, rng);
    for (size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(mc.rates.per_position[i], exact.per_position[i],
                    4.0 * mc.per_position_se[i] + 1e-9);
    }
}

TEST(MethodNames, RoundTrip) {
    for (auto m : {VerifyMethod::kSingle, VerifyMethod::kRrs, VerifyMethod::kRrsw,
                   VerifyMethod::kSpecHub}) {
        EXPECT_EQ(parse_method(method_name(m)), m);
    }
    EXPECT_THROW(parse_method("other"), std::invalid_argument);
}

}  // namespace
}  // namespace specdec
