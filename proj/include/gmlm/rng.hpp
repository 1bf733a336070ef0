#pragma once

#include <cstdint>
#include <random>

namespace gmlm {

/// splitmix64 step; used to derive independent sub-stream seeds from a master
/// seed so every consumer (chains, replications, modes) gets its own engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic seed for sub-stream `index` of stream `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    std::uint64_t derived = splitmix64(state);
    state = derived ^ (index * 0xd1342543de82ef95ULL + 1);
    return splitmix64(state);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(seed, index));
}

}  // namespace gmlm
