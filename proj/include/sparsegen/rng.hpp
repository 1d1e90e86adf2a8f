#pragma once

#include <cstdint>
#include <random>

namespace sparsegen {

using Engine = std::mt19937_64;

// Independent sub-streams carved out of a single root seed.
enum class Stream : std::uint64_t {
    count = 1,       // Poisson impulse count
    locations = 2,   // impulse locations
    amplitudes = 3,  // impulse amplitudes
    trials = 4,      // per-trial root seeds for Monte-Carlo studies
    reference = 5,   // exact reference samples (KS baselines)
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of sub-stream (stream, index) of `root`:
//   mix64(mix64(root) ^ mix64(stream * 2^32 + index))
// The split is a pure function, so trials run in any order or on any thread
// draw the same numbers.
constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                    std::uint64_t index = 0) noexcept {
    const auto tag = (static_cast<std::uint64_t>(stream) << 32) + index;
    return mix64(mix64(root) ^ mix64(tag));
}

inline Engine make_engine(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
    return Engine{derive_seed(root, stream, index)};
}

}  // namespace sparsegen
