#pragma once

#include <cstdint>

namespace foggen {

// splitmix64. Self-contained so that seeded runs are bit-reproducible across
// platforms and standard libraries.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is negligible for n << 2^64.
    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(next() % n);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    SplitMix64 mix(seed ^ (value + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2)));
    return mix.next();
}

inline std::uint64_t fnv1a64(const char* data, std::uint64_t len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::uint64_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace foggen
