#pragma once

// Counter-based random numbers.
//
// Every draw is a pure function of (seed, stream, index, word), so results do
// not depend on the order in which draws are made or on how work is split
// across threads. The mixing function is the SplitMix64 finalizer applied in
// a keyed chain.

#include <cstdint>

namespace lacunaria {

/// Sub-stream identifiers. A single top-level seed feeds every consumer;
/// each consumer mixes in its own stream id.
enum class Stream : std::uint64_t {
    RStarSequence = 1,
    RandomPermutation = 2,
    SamplePoints = 3,
    LilPoints = 4,
    PermutationSeeds = 5,
};

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One 64-bit word of the keyed stream.
constexpr std::uint64_t counter_word(std::uint64_t seed, Stream stream, std::uint64_t index,
                                     std::uint64_t word = 0) noexcept {
    std::uint64_t h = splitmix64_mix(seed);
    h = splitmix64_mix(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64_mix(h ^ index);
    return splitmix64_mix(h ^ (word * 0xd1b54a32d192ed03ULL));
}

/// Sequential reader over the words of one (seed, stream, index) key.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept
        : seed_(seed), stream_(stream), index_(index) {}

    std::uint64_t next() noexcept { return counter_word(seed_, stream_, index_, word_++); }

    /// Uniform integer in [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        for (;;) {
            const std::uint64_t v = next();
            if (v < limit) return v % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint64_t index_;
    std::uint64_t word_ = 0;
};

}  // namespace lacunaria
