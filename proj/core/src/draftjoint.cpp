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

#include "specdec/draftjoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specdec {

PairJoint PairJoint::independent(const Distribution& q) {
    PairJoint out;
    out.kind_ = Kind::kDense;
    out.vocab_ = q.size();
    out.dense_.resize(q.size() * q.size());
    for (size_t i = 0; i < q.size(); ++i) {
        for (size_t j = 0; j < q.size(); ++j) {
            out.dense_[i * q.size() + j] = q[i] * q[j];
        }
    }
    return out;
}

PairJoint PairJoint::without_replacement(const Distribution& q) {
    const Token a = top_token(q);
    if (q[static_cast<size_t>(a)] >= kDegenerateTopMass) {
        throw DegenerateInputError(
            "without_replacement: draft distribution concentrated on one token");
    }
    PairJoint out;
    out.kind_ = Kind::kDense;
    out.vocab_ = q.size();
    out.dense_.assign(q.size() * q.size(), 0.0);
    for (size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        const double scale = q[i] / (1.0 - q[i]);
        for (size_t j = 0; j < q.size(); ++j) {
            if (j == i) continue;
            out.dense_[i * q.size() + j] = scale * q[j];
        }
    }
    return out;
}

PairJoint PairJoint::hub(const Distribution& q) {
    const Token a = top_token(q);
    const double qa = q[static_cast<size_t>(a)];
    if (qa >= kDegenerateTopMass) {
        throw DegenerateInputError(
            "hub: draft distribution concentrated on the hub token");
    }
    PairJoint out;
    out.kind_ = Kind::kHubSparse;
    out.vocab_ = q.size();
    out.hub_ = a;
    out.col_.assign(q.size(), 0.0);
    out.row_.assign(q.size(), 0.0);
    const double row_scale = qa / (1.0 - qa);
    for (size_t x = 0; x < q.size(); ++x) {
        if (static_cast<Token>(x) == a) continue;
        out.col_[x] = q[x];
        out.row_[x] = row_scale * q[x];
    }
    return out;
}

PairJoint PairJoint::dense_from_matrix(size_t vocab, std::vector<double> matrix) {
    if (matrix.size() != vocab * vocab) {
        throw std::invalid_argument("dense_from_matrix: size mismatch");
    }
    double total = 0.0;
    for (double v : matrix) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("dense_from_matrix: negative entry");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("dense_from_matrix: total mass != 1");
    }
    PairJoint out;
    out.kind_ = Kind::kDense;
    out.vocab_ = vocab;
    out.dense_ = std::move(matrix);
    return out;
}

Token PairJoint::hub_token() const {
    if (kind_ != Kind::kHubSparse) {
        throw std::logic_error("hub_token: joint is not hub-sparse");
    }
    return hub_;
}

double PairJoint::mass(Token x1, Token x2) const {
    const auto i = static_cast<size_t>(x1);
    const auto j = static_cast<size_t>(x2);
    if (i >= vocab_ || j >= vocab_) {
        throw std::invalid_argument("PairJoint::mass: token out of range");
    }
    if (kind_ == Kind::kDense) return dense_[i * vocab_ + j];
    if (x2 == hub_ && x1 != hub_) return col_[i];
    if (x1 == hub_ && x2 != hub_) return row_[j];
    return 0.0;
}

double PairJoint::first_marginal(Token x1) const {
    const auto i = static_cast<size_t>(x1);
    if (i >= vocab_) {
        throw std::invalid_argument("PairJoint::first_marginal: token out of range");
    }
    if (kind_ == Kind::kDense) {
        return std::accumulate(dense_.begin() + static_cast<ptrdiff_t>(i * vocab_),
                               dense_.begin() + static_cast<ptrdiff_t>((i + 1) * vocab_),
                               0.0);
    }
    if (x1 == hub_) {
        return std::accumulate(row_.begin(), row_.end(), 0.0);
    }
    return col_[i];  // the only pair led by x is (x, a)
}

double PairJoint::total_mass() const {
    if (kind_ == Kind::kDense) {
        return std::accumulate(dense_.begin(), dense_.end(), 0.0);
    }
    return std::accumulate(col_.begin(), col_.end(), 0.0) +
           std::accumulate(row_.begin(), row_.end(), 0.0);
}

const std::vector<double>& PairJoint::hub_col() const {
    if (kind_ != Kind::kHubSparse) {
        throw std::logic_error("hub_col: joint is not hub-sparse");
    }
    return col_;
}

const std::vector<double>& PairJoint::hub_row() const {
    if (kind_ != Kind::kHubSparse) {
        throw std::logic_error("hub_row: joint is not hub-sparse");
    }
    return row_;
}

const std::vector<double>& PairJoint::matrix() const {
    if (kind_ != Kind::kDense) {
        throw std::logic_error("matrix: joint is hub-sparse");
    }
    return dense_;
}

std::pair<Token, Token> sample_pair(const PairJoint& joint, Rng& rng) {
    const auto vocab = static_cast<Token>(joint.vocab());
    if (joint.kind() == PairJoint::Kind::kDense) {
        const int32_t flat = sample_categorical(joint.matrix(), rng);
        return {flat / vocab, flat % vocab};
    }
    // Hub-sparse: one flat draw over [col | row].
    const auto& col = joint.hub_col();
    const auto& row = joint.hub_row();
    std::vector<double> flat(col.size() + row.size());
    std::copy(col.begin(), col.end(), flat.begin());
    std::copy(row.begin(), row.end(), flat.begin() + static_cast<ptrdiff_t>(col.size()));
    const int32_t idx = sample_categorical(flat, rng);
    const Token a = joint.hub_token();
    if (idx < vocab) return {idx, a};
    return {a, idx - vocab};
}

std::vector<Token> sample_drafts_rrs(const Distribution& q, int k,
                                     bool without_replacement, Rng& rng) {
    if (k < 1) throw std::invalid_argument("sample_drafts_rrs: k must be >= 1");
    std::vector<Token> drafts;
    drafts.reserve(static_cast<size_t>(k));
    if (!without_replacement) {
        CategoricalSampler sampler(q.span());
        for (int i = 0; i < k; ++i) drafts.push_back(sampler.sample(rng));
        return drafts;
    }
    int support = 0;
    for (size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) ++support;
    }
    if (support < k) {
        throw DegenerateInputError(
            "sample_drafts_rrs: fewer positive-mass tokens than draws");
    }
    std::vector<double> weights(q.probs());
    for (int i = 0; i < k; ++i) {
        const Token t = sample_categorical(weights, rng);
        drafts.push_back(t);
        weights[static_cast<size_t>(t)] = 0.0;
    }
    return drafts;
}

}  // namespace specdec
