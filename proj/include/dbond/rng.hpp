#pragma once

// Counter-based random source: SplitMix64 output function over an explicit
// counter, keyed per substream, so draw i of stream s is a pure function of
// (seed, s, i). Parallel and serial runs therefore produce identical paths.

#include <cmath>
#include <cstdint>

namespace dbond {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

class CounterRng {
public:
    CounterRng() = default;
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + kGolden) ^ (stream * 0xD1342543DE82EF95ull + 1))) {}

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

    // Uniform in (0, 1), both endpoints excluded.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Per-path wrapper: Box-Muller normals with a cached spare, and an antithetic
// flip that negates normals and reflects event uniforms (u -> 1 - u).
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream, bool antithetic_flip)
        : rng_(seed, stream), flip_(antithetic_flip) {}

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return flip_ ? -spare_ : spare_;
        }
        const double u1 = rng_.next_uniform();
        const double u2 = rng_.next_uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586477 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        const double z = rad * std::cos(ang);
        return flip_ ? -z : z;
    }

    // Event uniform in (0, 1); antithetic paths see the reflected value.
    double event_uniform() {
        const double u = rng_.next_uniform();
        return flip_ ? 1.0 - u : u;
    }

    double exponential() { return -std::log1p(-event_uniform()); }

private:
    CounterRng rng_;
    bool flip_ = false;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace dbond
