#pragma once

#include <cstdint>
#include <random>

namespace mhm {

// Substream seeding: path i draws its engine seed from the (i+1)-th output
// of a SplitMix64 stream started at the run seed. Keeps paths independent of
// each other and of the path count, so results are reproducible under any
// scheduling of the path loop.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64_at(seed, index));
}

// 53-bit uniform in [0,1). Hand-rolled instead of uniform_real_distribution
// so that identical seeds give identical streams on every platform.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace mhm
