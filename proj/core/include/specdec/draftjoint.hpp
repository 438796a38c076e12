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

#include "specdec/rng.hpp"
#include "specdec/simplex.hpp"

namespace specdec {

/// Joint distribution over ordered draft pairs (x1, x2).
///
/// Two representations:
///  - dense: a row-major V x V matrix;
///  - hub-sparse: all mass lies in column a and row a of the matrix, where a
///    is the hub token. Stored as two length-V arrays (col[x] = Q(x, a),
///    row[x] = Q(a, x), both zero at x = a), which is what keeps the hub
///    construction O(V) instead of O(V^2).
class PairJoint {
public:
    enum class Kind { kDense, kHubSparse };

    /// Q(x1, x2) = q(x1) * q(x2).
    static PairJoint independent(const Distribution& q);

    /// Without replacement: Q(x1, x2) = q(x1) * q(x2) / (1 - q(x1)) for
    /// x1 != x2, zero diagonal. Throws DegenerateInputError when q puts
    /// >= 1 - 1e-12 of its mass on one token.
    static PairJoint without_replacement(const Distribution& q);

    /// Hub-sparse joint around a = top_token(q): Q(x, a) = q(x) and
    /// Q(a, x) = q(a) q(x) / (1 - q(a)) for x != a. Same degeneracy rule as
    /// without_replacement.
    static PairJoint hub(const Distribution& q);

    /// Dense joint from an explicit row-major matrix (testing/trace entry).
    static PairJoint dense_from_matrix(size_t vocab, std::vector<double> matrix);

    Kind kind() const { return kind_; }
    size_t vocab() const { return vocab_; }

    /// Hub token; only valid for hub-sparse joints.
    Token hub_token() const;

    double mass(Token x1, Token x2) const;

    /// Marginal of the first coordinate: sum_{x2} Q(x1, x2).
    double first_marginal(Token x1) const;

    double total_mass() const;

    /// Hub accessors (throw for dense joints).
    const std::vector<double>& hub_col() const;  // col[x] = Q(x, a)
    const std::vector<double>& hub_row() const;  // row[x] = Q(a, x)

    /// Dense accessor (throws for hub-sparse joints).
    const std::vector<double>& matrix() const;

private:
    PairJoint() = default;

    Kind kind_ = Kind::kDense;
    size_t vocab_ = 0;
    std::vector<double> dense_;  // row-major V x V, dense only
    Token hub_ = -1;             // hub-sparse only
    std::vector<double> col_;    // Q(x, a), hub-sparse only
    std::vector<double> row_;    // Q(a, x), hub-sparse only
};

/// Ordered pair distributed per Q; deterministic given the rng state.
std::pair<Token, Token> sample_pair(const PairJoint& joint, Rng& rng);

/// k draws from q, independent or sequentially without replacement
/// (renormalizing after each draw). Without replacement requires at least k
/// positive-mass tokens; throws DegenerateInputError otherwise.
std::vector<Token> sample_drafts_rrs(const Distribution& q, int k,
                                     bool without_replacement, Rng& rng);

/// Threshold below which a draft distribution counts as one-hot and the
/// without-replacement / hub constructions refuse to divide by 1 - q(a).
constexpr double kDegenerateTopMass = 1.0 - 1e-12;

}  // namespace specdec
