#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sigcmp::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based substream key: a pure function of the root seed and the path of
/// counters (trial index, grid index, ...). Trial r of a resampling loop always sees
/// the same stream no matter which thread runs it.
constexpr std::uint64_t substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t c : path) {
        key = splitmix64(key ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    }
    return key;
}

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Engine(substream(seed, path));
}

}  // namespace sigcmp::rng
