#pragma once

#include <cstdint>
#include <random>

namespace spn {

// mt19937_64 output is fixed by the standard; the conversions below are
// hand-written so streams are bit-identical across standard libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Independent stream for (master seed, index, salt). Replication i of a run
/// always receives the same stream regardless of which thread executes it.
Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0);

/// Uniform on [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

bool bernoulli(Rng& rng, double p) noexcept;

/// Uniform integer in [lo, hi].
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept;

/// Box-Muller without caching the second variate.
double standard_normal(Rng& rng) noexcept;

/// Binomial(trials, p) by inversion from the lighter tail.
std::int64_t binomial(Rng& rng, std::int64_t trials, double p) noexcept;

// Stream salts so different consumers of one seed never share a stream.
inline constexpr std::uint64_t kArrivalSalt = 0xA7711A1ULL;
inline constexpr std::uint64_t kPolicySalt = 0x9011C7ULL;
inline constexpr std::uint64_t kScenarioSalt = 0x5CE7A810ULL;

}  // namespace spn
