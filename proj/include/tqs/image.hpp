#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tqs {

// Intensities are kept normalized to [0,1] in memory; quantization happens
// only at file boundaries (io.hpp).
template <class Tag>
struct BasicImage {
    int width = 0;
    int height = 0;
    std::vector<double> samples;  // row-major, samples[y * width + x]

    BasicImage() = default;
    BasicImage(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("image dimensions must be positive");
        samples.assign(static_cast<std::size_t>(w) * h, fill);
    }

    double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }

    bool same_dims(const BasicImage& o) const { return width == o.width && height == o.height; }
};

struct HiResTag {};
struct SensorTag {};

// Fine-grid signal; for a sensor of X̃×Ỹ pixels this is 2X̃ × 2Ỹ.
using HiResImage = BasicImage<HiResTag>;
// One value per sensor pixel (2×2 fine-grid group).
using SensorImage = BasicImage<SensorTag>;

// Whether a pattern code names the insensitive quadrant (three-quarter
// layouts) or the single sensitive one (quarter layout).
enum class PatternMeaning : std::uint8_t { Discarded, Kept };

inline char meaning_char(PatternMeaning m) { return m == PatternMeaning::Discarded ? 'D' : 'K'; }

// Per-sensor-pixel quadrant designation. Codes follow the within-group scan
// order: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1) as (row offset, column offset).
struct QuadrantPattern {
    int width = 0;
    int height = 0;
    PatternMeaning meaning = PatternMeaning::Discarded;
    std::vector<std::uint8_t> codes;  // row-major

    QuadrantPattern() = default;
    QuadrantPattern(int w, int h, PatternMeaning m, std::uint8_t fill = 0)
        : width(w), height(h), meaning(m) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("pattern dimensions must be positive");
        codes.assign(static_cast<std::size_t>(w) * h, fill);
    }

    std::uint8_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return codes[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace tqs
