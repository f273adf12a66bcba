#pragma once

#include <cmath>
#include <cstdint>

namespace pahc {

// Counter-based deterministic RNG built on splitmix64. Streams are keyed by
// (seed, tag, index), so parallel producers can draw independent streams whose
// output does not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t key_mix(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * tag));
    return splitmix64(h ^ (0xC2B2AE3D27D4EB4FULL * index));
}

class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}
    Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
        : state_(key_mix(seed, tag, index)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_open_double() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
    // so the stream position is a pure function of the draw count.
    double next_normal() {
        double u1 = next_open_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny relative to 2^64.
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace pahc
