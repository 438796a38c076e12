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

#include "specdec/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace specdec {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kEmptyResidualMass = 1e-12;

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("Distribution: empty vocabulary");
    }
    double sum = 0.0;
    for (double v : probs_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("Distribution: negative or non-finite entry");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument("Distribution: entries sum to " +
                                    std::to_string(sum) + ", expected 1");
    }
}

Distribution Distribution::from_unnormalized(std::vector<double> mass) {
    if (mass.empty()) {
        throw std::invalid_argument("Distribution: empty vocabulary");
    }
    double sum = 0.0;
    for (double v : mass) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("Distribution: negative or non-finite mass");
        }
        sum += v;
    }
    if (sum <= 0.0) {
        throw std::invalid_argument("Distribution: zero total mass");
    }
    for (double& v : mass) v /= sum;
    return Distribution(std::move(mass));
}

Distribution Distribution::uniform(size_t vocab) {
    if (vocab == 0) throw std::invalid_argument("Distribution: empty vocabulary");
    return Distribution(std::vector<double>(vocab, 1.0 / static_cast<double>(vocab)));
}

Distribution Distribution::delta(size_t vocab, Token token) {
    if (token < 0 || static_cast<size_t>(token) >= vocab) {
        throw std::invalid_argument("Distribution::delta: token out of range");
    }
    std::vector<double> probs(vocab, 0.0);
    probs[static_cast<size_t>(token)] = 1.0;
    return Distribution(std::move(probs));
}

Logits::Logits(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("Logits: empty vocabulary");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Logits: non-finite entry");
        }
    }
}

Distribution softmax_with_temperature(const Logits& logits, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw std::invalid_argument("softmax_with_temperature: T must be positive");
    }
    const auto& v = logits.values();
    const double inv_t = 1.0 / temperature;
    double max_scaled = v[0] * inv_t;
    for (double x : v) max_scaled = std::max(max_scaled, x * inv_t);

    std::vector<double> probs(v.size());
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        probs[i] = std::exp(v[i] * inv_t - max_scaled);
        sum += probs[i];
    }
    for (double& x : probs) x /= sum;
    return Distribution(std::move(probs));
}

double overlap(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("overlap: vocabulary size mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += std::min(p[i], q[i]);
    return acc;
}

Residual residual(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("residual: vocabulary size mismatch");
    }
    Residual out;
    out.overlap = overlap(p, q);

    std::vector<double> mass(p.size());
    double total = 0.0;
    detail::subtract_clamped(p.span(), q.span(), mass, total);
    if (total <= kEmptyResidualMass) {
        return out;  // p == q within tolerance; signal empty, never fabricate
    }
    for (double& v : mass) v /= total;
    out.dist = Distribution(std::move(mass));
    return out;
}

Token top_token(const Distribution& q) {
    size_t best = 0;
    for (size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = i;  // strict: ties keep the lowest index
    }
    return static_cast<Token>(best);
}

namespace detail {

void subtract_clamped(std::span<const double> p, std::span<const double> q,
                      std::vector<double>& out, double& mass) {
    out.resize(p.size());
    mass = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        out[i] = d > 0.0 ? d : 0.0;
        mass += out[i];
    }
}

}  // namespace detail

}  // namespace specdec
