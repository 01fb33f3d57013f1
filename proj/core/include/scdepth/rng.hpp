#pragma once

#include <cstdint>

namespace scdepth {

/// Deterministic splitmix64 generator. Used instead of <random> distributions
/// so that sampler outputs are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t uniform(uint64_t n) {
        // Rejection sampling keeps the result exactly uniform.
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1).
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Stateless hash of (seed, index); basis for counter-based per-pixel streams.
    static uint64_t hash(uint64_t seed, uint64_t index) {
        uint64_t z = seed * 0x9e3779b97f4a7c15ULL + index + 1;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static double hash01(uint64_t seed, uint64_t index) {
        return double(hash(seed, index) >> 11) * 0x1.0p-53;
    }

private:
    uint64_t state_;
};

}  // namespace scdepth
