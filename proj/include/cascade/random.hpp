#ifndef CASCADE_RANDOM_HPP
#define CASCADE_RANDOM_HPP

#include <cstdint>
#include <random>

namespace cascade {

/**
 * All randomness goes through a 64-bit Mersenne Twister. Its output sequence is
 * fixed by the C++ standard, and the conversions below avoid the
 * implementation-defined standard distributions, so streams are identical
 * across platforms and standard libraries.
 */
using Rng = std::mt19937_64;

/// Uniform double on [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer on [0, n) by multiply-high. n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// SplitMix64 finalizer, used to derive independent seed streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace cascade

#endif
