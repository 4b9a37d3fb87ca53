// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "wice/types.hpp"

namespace wice {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`. Depends only on the pair, so frame n
/// gets the same stream no matter which worker simulates it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Circularly-symmetric complex Gaussian with unit variance.
inline cplx complex_gaussian(Rng& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline BitVector random_bits(std::size_t count, std::uint64_t seed)
{
    Rng rng(seed);
    BitVector bits(count);
    std::uint64_t word = 0;
    for (std::size_t n = 0; n < count; ++n) {
        if (n % 64 == 0) {
            word = rng();
        }
        bits[n] = static_cast<std::uint8_t>((word >> (n % 64)) & 1U);
    }
    return bits;
}

/// Zeroth-order Bessel function of the first kind.
inline double bessel_j0(double x)
{
    return std::cyl_bessel_j(0.0, std::abs(x));
}

} // namespace wice
