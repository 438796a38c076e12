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
#include <optional>
#include <span>
#include <vector>

#include "specdec/errors.hpp"

namespace specdec {

using Token = int32_t;

/// A point on the probability simplex over a vocabulary: entries are
/// non-negative and sum to 1 within 1e-9. Immutable after construction.
class Distribution {
public:
    /// Validates the invariants; throws std::invalid_argument on violation.
    explicit Distribution(std::vector<double> probs);

    /// Normalizes a non-negative mass vector (divides by its actual sum).
    static Distribution from_unnormalized(std::vector<double> mass);

    static Distribution uniform(size_t vocab);
    static Distribution delta(size_t vocab, Token token);

    size_t size() const { return probs_.size(); }
    double operator[](size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }
    std::span<const double> span() const { return probs_; }

    bool operator==(const Distribution& other) const = default;

private:
    std::vector<double> probs_;
};

/// Unnormalized log-scores; all entries must be finite.
class Logits {
public:
    explicit Logits(std::vector<double> values);

    size_t size() const { return values_.size(); }
    double operator[](size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// softmax(values / T), computed with the max subtracted before
/// exponentiation. T must be positive.
Distribution softmax_with_temperature(const Logits& logits, double temperature);

/// First-draft acceptance rate of rejection sampling:
/// sum_x min(p(x), q(x)), in [0, 1].
double overlap(const Distribution& p, const Distribution& q);

/// Residual of p after q. `empty` is set instead of a distribution when
/// p and q coincide within 1e-12 total mass; callers must not sample then.
struct Residual {
    std::optional<Distribution> dist;  // norm(max(p - q, 0)) when non-empty
    double overlap = 0.0;              // sum_x min(p(x), q(x))

    bool empty() const { return !dist.has_value(); }
};

Residual residual(const Distribution& p, const Distribution& q);

/// argmax over q, ties broken by lowest index.
Token top_token(const Distribution& q);

namespace detail {

/// max(p - q, 0) elementwise plus its total mass; shared by the verification
/// paths that keep running residuals in unnormalized form.
void subtract_clamped(std::span<const double> p, std::span<const double> q,
                      std::vector<double>& out, double& mass);

}  // namespace detail

}  // namespace specdec
