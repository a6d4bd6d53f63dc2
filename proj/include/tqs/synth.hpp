#pragma once

#include <cmath>
#include <stdexcept>

#include "tqs/image.hpp"

namespace tqs {

inline constexpr double kPi = 3.14159265358979323846;

// Vertical sinusoidal line pattern. rel_freq is percent of the low-res
// sampling frequency: 100% = 0.5 cycles per fine-grid pixel (fine Nyquist).
inline HiResImage line_pattern(int X, int Y, double rel_freq) {
    if (!(rel_freq > 0.0 && rel_freq <= 100.0))
        throw std::invalid_argument("line_pattern: rel_freq must be in (0,100]");
    if (X % 2 || Y % 2) throw std::invalid_argument("line_pattern: dimensions must be even");
    HiResImage img(X, Y);
    const double f = rel_freq / 100.0 * 0.5;
    for (int x = 0; x < X; ++x) {
        double v = 0.5 + 0.5 * std::cos(2.0 * kPi * f * x);
        for (int y = 0; y < Y; ++y) img.at(x, y) = v;
    }
    return img;
}

// Rotation-symmetric chirp; the instantaneous radial frequency reaches the
// fine-grid Nyquist (0.5 cycles/pixel) at r = R = max(X,Y)/2.
inline HiResImage zoneplate(int X, int Y) {
    if (X % 2 || Y % 2) throw std::invalid_argument("zoneplate: dimensions must be even");
    HiResImage img(X, Y);
    const double cx = X / 2.0, cy = Y / 2.0;
    const double R = (X > Y ? X : Y) / 2.0;
    for (int y = 0; y < Y; ++y)
        for (int x = 0; x < X; ++x) {
            double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            img.at(x, y) = 0.5 + 0.5 * std::cos(kPi * r2 / (2.0 * R));
        }
    return img;
}

inline HiResImage constant(int X, int Y, double v) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("constant: value must be in [0,1]");
    return HiResImage(X, Y, v);
}

}  // namespace tqs
