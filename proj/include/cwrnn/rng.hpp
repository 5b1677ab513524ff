// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation. The generator is pinned to
// xoshiro256** (seeded through splitmix64) so a seed produces the same
// stream on every platform; standard-library distributions are never
// used because their output is implementation-defined.

#pragma once

#include <array>
#include <cstdint>

namespace cwrnn {

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Next raw 64-bit word of the xoshiro256** stream.
    std::uint64_t next_u64();

    // Uniform in [0, 1) using the top 53 bits.
    double uniform01();

    // Uniform integer in [0, bound) via rejection sampling; bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Sample from N(mean, std^2) with the Box-Muller transform. Each call
    // consumes exactly two uniform draws (the second Box-Muller output is
    // discarded, keeping the stream position a simple function of the call
    // count). std == 0 returns mean without consuming randomness; std < 0
    // throws.
    double gaussian(double mean, double std);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

// Derives an independent stream seed from a base seed and a stream index,
// used to give parallel workers and data generators unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace cwrnn
