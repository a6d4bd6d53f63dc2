#pragma once

#include <cmath>
#include <cstdint>

namespace tqs {

// SplitMix64 (Steele/Lea/Flood; same mixer as in java.util.SplittableRandom).
// Used for all noise draws; pattern generation uses std::mt19937_64 instead
// (see sensor.hpp).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1), 53-bit resolution
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent per-pixel stream: hashing (seed, index) decorrelates streams so
// results do not depend on pixel visit order or thread count.
inline SplitMix64 pixel_stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1)));
}

// Box-Muller; one normal per call (the sine partner is discarded to keep the
// draw count per call fixed).
inline double gaussian(SplitMix64& rng) {
    double u1 = 1.0 - rng.uniform01();  // (0,1], keeps log finite
    double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

namespace detail {

// Knuth's product-of-uniforms method; fine for small lambda only.
inline long poisson_knuth(SplitMix64& rng, double lambda) {
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform01();
    } while (p > limit);
    return k - 1;
}

// Hörmann's PTRS transformed-rejection sampler, exact for lambda >= 10.
inline long poisson_ptrs(SplitMix64& rng, double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = rng.uniform01() - 0.5;
        double v = rng.uniform01();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * loglam - lambda - std::lgamma(kf + 1.0))
            return static_cast<long>(kf);
    }
}

}  // namespace detail

inline long poisson(SplitMix64& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 10.0) return detail::poisson_knuth(rng, lambda);
    return detail::poisson_ptrs(rng, lambda);
}

}  // namespace tqs
