#pragma once

#include <cstdint>
#include <random>

namespace epiflow {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche, used to turn (seed, index) into
// independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Substream seed for run `index` under a master seed. Substreams are
// independent of evaluation order, so runs can execute concurrently and
// still aggregate to bit-identical results.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Uniform in [0,1) from the top 53 bits; avoids the implementation-defined
// behavior of std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
inline int uniform_below(Rng& rng, int n) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

} // namespace epiflow
