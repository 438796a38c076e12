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
#include <span>
#include <vector>

#include "specdec/errors.hpp"

namespace specdec {

/// splitmix64 finalizer. Fixed algorithm so seeded results are identical
/// across platforms and standard-library versions.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless counter hash: independent 64-bit words addressed by
/// (seed, a, b, c, d). Used wherever a value must be a pure function of its
/// coordinates (toy pair generation, per-(step,depth) process keys).
constexpr uint64_t counter_hash(uint64_t seed, uint64_t a, uint64_t b = 0,
                                uint64_t c = 0, uint64_t d = 0) {
    uint64_t h = mix64(seed);
    h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (b + 0xc2b2ae3d27d4eb4fULL));
    h = mix64(h ^ (c + 0x165667b19e3779f9ULL));
    h = mix64(h ^ (d + 0x27d4eb2f165667c5ULL));
    return h;
}

inline double u64_to_unit(uint64_t x) {
    // 53 high bits -> [0, 1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Uniform double in [0,1) addressed purely by counters.
inline double counter_uniform(uint64_t seed, uint64_t a, uint64_t b = 0,
                              uint64_t c = 0, uint64_t d = 0) {
    return u64_to_unit(counter_hash(seed, a, b, c, d));
}

/// Sequential splitmix64 stream. Every stochastic operation in this library
/// takes one of these explicitly; identical seeds give identical outcomes.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1).
    double uniform() { return u64_to_unit(next_u64()); }

    /// Independent child stream; does not advance this stream.
    Rng derived(uint64_t tag) const { return Rng(counter_hash(state_, tag)); }

private:
    uint64_t state_;
};

/// Seed for an independent stream addressed by (master, path...).
constexpr uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0,
                               uint64_t c = 0) {
    return counter_hash(master, a, b, c, 0xd1f3c659ULL);
}

/// Inverse-CDF categorical sampler over fixed non-negative weights.
/// Builds the prefix table once; each draw is one uniform plus a binary
/// search, so repeated draws from the same distribution are cheap.
class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double> weights) {
        prefix_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("negative sampling weight");
            acc += w;
            prefix_.push_back(acc);
        }
        if (prefix_.empty() || acc <= 0.0) {
            throw std::invalid_argument("cannot sample from empty/zero weights");
        }
        total_ = acc;
    }

    int32_t sample(Rng& rng) const {
        const double target = rng.uniform() * total_;
        size_t lo = 0, hi = prefix_.size() - 1;
        while (lo < hi) {
            const size_t mid = (lo + hi) / 2;
            if (prefix_[mid] > target) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        // Zero-weight entries have empty half-open intervals and are never
        // selected, except if rounding lands target exactly on the total;
        // walk back to the nearest positive weight in that case.
        size_t idx = lo;
        while (idx > 0 && prefix_[idx] == prefix_[idx - 1]) {
            --idx;
        }
        return static_cast<int32_t>(idx);
    }

    double total() const { return total_; }

private:
    std::vector<double> prefix_;
    double total_ = 0.0;
};

/// One-shot categorical draw (builds the prefix table internally).
inline int32_t sample_categorical(std::span<const double> weights, Rng& rng) {
    return CategoricalSampler(weights).sample(rng);
}

}  // namespace specdec
