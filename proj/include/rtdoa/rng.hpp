#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rtdoa {

using RngEngine = std::mt19937_64;

// splitmix64 step; used to hash seed paths into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives a child seed from a root seed and a path of indices, e.g.
// (seed, {scenario, delay_index, trial}). Streams derived from distinct
// paths are independent, which keeps parallel trial schedules
// reproducible.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = root ^ 0xa02bdbf7bb3c0a7ULL;
    splitmix64(s);
    for (std::uint64_t part : path) {
        s ^= splitmix64(s) ^ (part + 0x9e3779b97f4a7c15ULL);
        splitmix64(s);
    }
    return splitmix64(s);
}

inline RngEngine make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path = {}) {
    return RngEngine(derive_seed(root, path));
}

}  // namespace rtdoa
