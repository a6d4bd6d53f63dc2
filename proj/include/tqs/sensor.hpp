#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "tqs/image.hpp"
#include "tqs/random.hpp"

namespace tqs {

enum class LayoutKind { LargePixel, QuarterNonReg, ThreeQuarterReg, ThreeQuarterNonReg };

// Fraction of the pixel cell that integrates light.
inline double fill_factor(LayoutKind layout) {
    switch (layout) {
        case LayoutKind::LargePixel: return 1.0;
        case LayoutKind::QuarterNonReg: return 0.25;
        default: return 0.75;
    }
}

struct NoiseParams {
    double full_well = 10000.0;   // electrons
    double readout_sigma = 25.0;  // electrons
    bool enabled = false;
};

// Pattern codes come from std::mt19937_64 (bit-exact across platforms per the
// C++ standard): one draw per pixel in row-major order, code = top two bits.
// This generator is part of the NSP1 reproducibility contract; never change
// it without a format version bump.
inline QuadrantPattern generate_pattern(LayoutKind layout, int width, int height,
                                        std::uint64_t seed) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("generate_pattern: dimensions must be positive");
    switch (layout) {
        case LayoutKind::LargePixel:
            return QuadrantPattern(width, height, PatternMeaning::Discarded, 0);
        case LayoutKind::ThreeQuarterReg:
            return QuadrantPattern(width, height, PatternMeaning::Discarded, 3);
        case LayoutKind::ThreeQuarterNonReg:
        case LayoutKind::QuarterNonReg: {
            QuadrantPattern pat(width, height,
                                layout == LayoutKind::QuarterNonReg ? PatternMeaning::Kept
                                                                    : PatternMeaning::Discarded);
            std::mt19937_64 rng(seed);
            for (auto& c : pat.codes) c = static_cast<std::uint8_t>(rng() >> 62);
            return pat;
        }
    }
    throw std::invalid_argument("generate_pattern: bad layout");
}

// Acquisition: each sensor pixel outputs the mean of its sensitive fine-grid
// quadrants (all four, the three non-discarded, or the single kept one).
inline SensorImage acquire(const HiResImage& hires, const QuadrantPattern& pattern,
                           LayoutKind layout) {
    if (hires.width != 2 * pattern.width || hires.height != 2 * pattern.height)
        throw std::invalid_argument("acquire: image dims must be 2x pattern dims");
    const bool three_quarter =
        layout == LayoutKind::ThreeQuarterReg || layout == LayoutKind::ThreeQuarterNonReg;
    if (three_quarter && pattern.meaning != PatternMeaning::Discarded)
        throw std::invalid_argument("acquire: three-quarter layouts need a DISCARDED-meaning pattern");
    if (layout == LayoutKind::QuarterNonReg && pattern.meaning != PatternMeaning::Kept)
        throw std::invalid_argument("acquire: quarter layout needs a KEPT-meaning pattern");

    SensorImage out(pattern.width, pattern.height);
    for (int yt = 0; yt < pattern.height; ++yt)
        for (int xt = 0; xt < pattern.width; ++xt) {
            // quadrant c at (row offset, col offset) = (c & 1, c >> 1)
            double q[4];
            for (int c = 0; c < 4; ++c)
                q[c] = hires.at(2 * xt + (c >> 1), 2 * yt + (c & 1));
            double v;
            switch (layout) {
                case LayoutKind::LargePixel:
                    v = 0.25 * (q[0] + q[1] + q[2] + q[3]);
                    break;
                case LayoutKind::QuarterNonReg:
                    v = q[pattern.at(xt, yt)];
                    break;
                default:
                    v = (q[0] + q[1] + q[2] + q[3] - q[pattern.at(xt, yt)]) / 3.0;
                    break;
            }
            out.at(xt, yt) = v;
        }
    return out;
}

// Shot + readout noise in electrons: expected electrons
// lambda = intensity * full_well * fill; Poisson(lambda) plus
// Gaussian(0, readout_sigma^2), renormalized by full_well * fill and clamped.
// Per-pixel counter-based streams make the result independent of evaluation
// order.
inline SensorImage apply_noise(const SensorImage& sensor, LayoutKind layout,
                               const NoiseParams& np, std::uint64_t seed) {
    if (np.full_well <= 0.0) throw std::invalid_argument("apply_noise: full_well must be > 0");
    if (np.readout_sigma < 0.0) throw std::invalid_argument("apply_noise: readout_sigma must be >= 0");
    if (!np.enabled) return sensor;

    const double scale = np.full_well * fill_factor(layout);
    SensorImage out(sensor.width, sensor.height);
    for (std::size_t i = 0; i < sensor.samples.size(); ++i) {
        SplitMix64 rng = pixel_stream(seed, i);
        const double lambda = sensor.samples[i] * scale;
        double electrons = static_cast<double>(poisson(rng, lambda));
        if (np.readout_sigma > 0.0) electrons += np.readout_sigma * gaussian(rng);
        double v = electrons / scale;
        out.samples[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

}  // namespace tqs
