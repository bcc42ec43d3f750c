#pragma once

#include <cstdint>
#include <random>

namespace hvsim {

using Rng = std::mt19937_64;

/// One SplitMix64 output for `x`; used to turn (seed, index) pairs into
/// well-separated generator seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Generator for stream `index` under `seed` (per-sample streams use seed + index).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index = 0) {
    return Rng(splitmix64(seed + index));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

}  // namespace hvsim
