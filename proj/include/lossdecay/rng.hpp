// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace lossdecay {

/// splitmix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for (seed, stream) pairs: mix64(seed ^ mix64(stream + golden)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Caller-owned random state. Copying it forks the stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix64(seed)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal draw.
    double normal();

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    bool operator==(const Rng& other) const {
        return engine_ == other.engine_ && normal_ == other.normal_;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Fisher-Yates permutation of 0..n-1 driven by `rng`.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

} // namespace lossdecay
