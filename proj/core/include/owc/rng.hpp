#pragma once

#include <array>
#include <cstdint>

namespace owc {

/// SplitMix64 step. Used both as a seed expander and as the integer hash
/// for deriving per-sample seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless mix of a single value (one SplitMix64 round on a copy).
std::uint64_t mix64(std::uint64_t value);

/// xoshiro256** seeded through SplitMix64.
///
/// All simulation randomness flows through this generator so that the same
/// seed gives bit-identical output on every platform. Only integer ops and
/// the explicit conversions below are used; no std::*_distribution, whose
/// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [lo, hi] (inclusive). Uses rejection, so no modulo bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace owc
