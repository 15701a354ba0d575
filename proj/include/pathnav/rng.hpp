// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pathnav
{

/// Engine used everywhere; all draws go through the helpers below so results
/// do not depend on the standard library's distribution implementations.
using Rng = std::mt19937_64;

/// Seed for a named substream of a run seed (sampling, bootstrap, synthesis...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

inline Rng make_rng(std::uint64_t seed, std::string_view stream)
{
    return Rng(derive_seed(seed, stream));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) noexcept
{
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n), n > 0, unbiased by rejection.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng) noexcept;

} // namespace pathnav
