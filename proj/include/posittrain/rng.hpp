#pragma once

// Counter-based generator: every draw is mix64(key + counter · golden) with
// the SplitMix64 finalizer, so any draw can be recomputed from (key, counter)
// in any language.

#include <cstdint>

namespace posittrain {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Stream tags keep independent uses of one seed apart.
enum class Stream : std::uint64_t { Shuffle = 1, WeightInit = 2, Test = 3 };

class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}

    /// Key for (seed, stream, index), e.g. index = epoch or layer.
    static constexpr CounterRng derive(std::uint64_t seed, Stream stream, std::uint64_t index) {
        std::uint64_t k = mix64(seed + kGolden);
        k = mix64(k ^ (static_cast<std::uint64_t>(stream) * kGolden));
        k = mix64(k ^ (index + 1) * 0xD1B54A32D192ED03ull);
        return CounterRng(k);
    }

    constexpr std::uint64_t at(std::uint64_t counter) const { return mix64(key_ + (counter + 1) * kGolden); }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }

    /// Integer in [0, bound) by 64x64 -> high-64 multiplication.
    constexpr std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(at(counter)) * bound) >> 64);
    }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace posittrain
