// Seed derivation for reproducible, splittable random streams.

#pragma once

#include <cstdint>
#include <random>

namespace catkd {

// SplitMix64 step; used as a mixing finalizer for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based derivation: independent streams for (master, salt_a, salt_b)
// without any sequential state shared between consumers.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt_a,
                                 std::uint64_t salt_b = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= z + salt_a * 0xd1342543de82ef95ULL;
    z = splitmix64(s);
    s ^= z + salt_b * 0xaf251af3b0f025b5ULL;
    return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t salt_a,
                                std::uint64_t salt_b = 0) {
    return std::mt19937_64(derive_seed(master, salt_a, salt_b));
}

}  // namespace catkd
