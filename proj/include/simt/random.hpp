#pragma once

#include <cstdint>
#include <random>

namespace simt {

// splitmix64 finalizer; cheap and well distributed.
inline std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag, so that
/// every randomized stage of a pipeline gets its own reproducible stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return split_mix(seed ^ split_mix(tag));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

using Rng = std::mt19937_64;

} // namespace simt
