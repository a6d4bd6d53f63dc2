#pragma once

#include <cmath>

#include "tqs/image.hpp"

namespace tqs {

// Nearest-neighbor expansion: each sensor value fills its 2x2 group.
inline HiResImage pixel_enlargement(const SensorImage& sensor) {
    HiResImage out(2 * sensor.width, 2 * sensor.height);
    for (int y = 0; y < sensor.height; ++y)
        for (int x = 0; x < sensor.width; ++x) {
            const double v = sensor.at(x, y);
            out.at(2 * x, 2 * y) = v;
            out.at(2 * x + 1, 2 * y) = v;
            out.at(2 * x, 2 * y + 1) = v;
            out.at(2 * x + 1, 2 * y + 1) = v;
        }
    return out;
}

namespace detail {

// Catmull-Rom family cubic, a = -0.5
inline double cubic_kernel(double t) {
    constexpr double a = -0.5;
    t = std::fabs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
    return 0.0;
}

// One output row/column: low-res centers sit at the centers of their 2x2
// groups, so fine sample x maps to source position x/2 - 0.25.
template <class Get>
inline double cubic_sample(const Get& src, int n, int x) {
    const double u = 0.5 * x - 0.25;
    const int b = static_cast<int>(std::floor(u));
    const double s = u - b;
    double acc = 0.0;
    for (int o = -1; o <= 2; ++o) {
        int idx = b + o;
        idx = idx < 0 ? 0 : (idx >= n ? n - 1 : idx);
        acc += src(idx) * cubic_kernel(s - o);
    }
    return acc;
}

}  // namespace detail

// Separable bicubic 2x upsampling, horizontal pass then vertical,
// clamp-to-edge borders, final clamp to [0,1].
inline HiResImage bicubic_x2(const SensorImage& sensor) {
    const int W = sensor.width, H = sensor.height;
    HiResImage tmp(2 * W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < 2 * W; ++x)
            tmp.at(x, y) = detail::cubic_sample([&](int i) { return sensor.at(i, y); }, W, x);
    HiResImage out(2 * W, 2 * H);
    for (int x = 0; x < 2 * W; ++x)
        for (int y = 0; y < 2 * H; ++y) {
            double v = detail::cubic_sample([&](int i) { return tmp.at(x, i); }, H, y);
            out.at(x, y) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    return out;
}

}  // namespace tqs
