#pragma once

#include <cstdint>
#include <cstring>
#include <random>

namespace otfs {

// Stateless 64-bit finalizer (splitmix64 step). Good avalanche behaviour,
// used purely to derive independent child seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based child-stream derivation. The (a, b, purpose) triple selects
// a stream as a pure function of the master seed, independent of evaluation
// order, so any subset of a sweep reproduces the full run bit for bit.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t purpose = 0) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ (0x9e3779b97f4a7c15ull + a));
    h = mix64(h ^ (0xc2b2ae3d27d4eb4full + b));
    h = mix64(h ^ (0x165667b19e3779f9ull + purpose));
    return h;
}

// Bit pattern of a double, used to key child streams by parameter *value*
// (e.g. the SNR point) rather than by grid position.
inline std::uint64_t double_key(double x) {
    std::uint64_t u = 0;
    std::memcpy(&u, &x, sizeof(u));
    return u;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace otfs
