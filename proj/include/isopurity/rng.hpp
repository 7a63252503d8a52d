#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace isopurity::rng {

// splitmix64 mix function. Stream seeds are derived counter-style,
// mix(seed + (stream+1)*gamma), so sub-streams are reproducible per index
// and independent of how many workers consume them.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) + (stream + 1) * 0x9E3779B97F4A7C15ULL);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(stream_seed(seed, stream));
}

// Draws are hand-rolled (not std::*_distribution) so that identical seeds
// give identical bytes on every standard library implementation.

// uniform in [0, 1)
inline double uniform_unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// uniform in (0, 1]
inline double uniform_open(std::mt19937_64& eng) {
    return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

// uniform in [lo, hi)
inline double uniform_range(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(eng);
}

// uniform integer in [0, n), unbiased by rejection
inline std::uint64_t bounded(std::mt19937_64& eng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

// two independent standard normals (Box-Muller)
inline std::pair<double, double> gaussian_pair(std::mt19937_64& eng) {
    const double u1 = uniform_open(eng);
    const double u2 = uniform_unit(eng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace isopurity::rng
