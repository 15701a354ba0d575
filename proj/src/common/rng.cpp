// SPDX-License-Identifier: Apache-2.0
#include "pathnav/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace pathnav
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept
{
    // FNV-1a over the stream name, mixed with the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c: stream)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed) ^ h);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit)
        v = rng();
    return v % n;
}

double standard_normal(Rng& rng) noexcept
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0)
        u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace pathnav
