#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace surge_lab {

/// SplitMix64 output mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a, used to turn stream names into stream ids.
inline constexpr std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/**
 * Counter-based 64-bit generator: draw n of stream (seed, name) is
 * mix64(key + n * golden), with key derived from both. Streams with different
 * names are independent, so consuming one never shifts another.
 */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::string_view stream)
        : key_(mix64(seed ^ mix64(hash_name(stream) + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    [[nodiscard]] std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace surge_lab
