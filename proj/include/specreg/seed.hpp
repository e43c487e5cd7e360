#pragma once

#include <cstdint>
#include <random>

namespace specreg {

/// Identifies one reproducible random stream. The same (root_seed,
/// stream_id) always yields the same draws; distinct stream_ids give
/// statistically independent streams, so Monte Carlo trials can be keyed
/// by trial index and run in any order.
struct SeedSpec {
    std::uint64_t root_seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used as the stream
// splitting function: full-period avalanche on 64 bits.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Engine seed for (root_seed, stream_id, lane). The lane separates
/// independent sub-streams inside one trial (e.g. the base matrix and its
/// Gaussian correction). Defined as the splitmix64 chain
///   mix(mix(mix(root) ^ stream) ^ lane)
/// so every coordinate change rekeys the whole 64-bit state.
inline std::uint64_t derive_seed(const SeedSpec& seed, std::uint64_t lane = 0) {
    using detail::splitmix64;
    return splitmix64(splitmix64(splitmix64(seed.root_seed) ^ seed.stream_id) ^ lane);
}

inline std::mt19937_64 make_engine(const SeedSpec& seed, std::uint64_t lane = 0) {
    return std::mt19937_64(derive_seed(seed, lane));
}

/// Stream for a given trial index under the same root.
inline SeedSpec stream_for_trial(const SeedSpec& seed, std::uint64_t trial) {
    return SeedSpec{seed.root_seed, trial};
}

} // namespace specreg
