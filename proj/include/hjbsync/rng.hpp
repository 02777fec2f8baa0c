#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "hjbsync/vec3.hpp"

namespace hjbsync {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
};

// Initial-condition box, one interval per state component.
using IcRange = std::array<Interval, 3>;

inline constexpr IcRange default_ic_range() { return {Interval{}, Interval{}, Interval{}}; }

void validate_ic_range(const IcRange& r);

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed derived from a base seed and a list of indices.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(base);
    for (auto p : parts) {
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

// n states drawn i.i.d. uniform from the box.
std::vector<OscState> draw_states(std::size_t n, const IcRange& range, std::uint64_t seed);

}  // namespace hjbsync
