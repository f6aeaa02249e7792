#pragma once

#include <cstdint>

namespace taxhedge {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for (stream, index) under a master seed. Path i of a batch always gets
// derive_seed(master, 0, i), independent of how paths are split over workers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

namespace streams {
inline constexpr std::uint64_t path = 0;
inline constexpr std::uint64_t states = 1;
inline constexpr std::uint64_t rates = 2;
inline constexpr std::uint64_t perturbations = 3;
} // namespace streams

} // namespace taxhedge
