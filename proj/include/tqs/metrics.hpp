#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tqs/baselines.hpp"
#include "tqs/image.hpp"
#include "tqs/sensor.hpp"
#include "tqs/solver.hpp"
#include "tqs/synth.hpp"

namespace tqs {

template <class Tag>
double psnr(const BasicImage<Tag>& a, const BasicImage<Tag>& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("psnr: dimension mismatch");
    double se = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = a.samples[i] - b.samples[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.samples.size());
    return 10.0 * std::log10(1.0 / mse);
}

namespace detail {
inline const std::vector<double>& ssim_window() {
    static const std::vector<double> win = [] {
        std::vector<double> w(121);
        double sum = 0.0;
        for (int i = 0; i < 11; ++i)
            for (int j = 0; j < 11; ++j) {
                const double d2 = (i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0);
                w[i * 11 + j] = std::exp(-d2 / (2.0 * 1.5 * 1.5));
                sum += w[i * 11 + j];
            }
        for (double& v : w) v /= sum;
        return w;
    }();
    return win;
}
}  // namespace detail

// Mean local SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// dynamic range 1, valid-region averaging (no padding).
template <class Tag>
double ssim(const BasicImage<Tag>& a, const BasicImage<Tag>& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("ssim: dimension mismatch");
    if (a.width < 11 || a.height < 11) throw std::invalid_argument("ssim: dims must be >= 11");
    const auto& win = detail::ssim_window();
    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    double total = 0.0;
    long count = 0;
    for (int y = 0; y + 11 <= a.height; ++y)
        for (int x = 0; x + 11 <= a.width; ++x) {
            double mu1 = 0.0, mu2 = 0.0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double w = win[i * 11 + j];
                    mu1 += w * a.at(x + j, y + i);
                    mu2 += w * b.at(x + j, y + i);
                }
            double v1 = 0.0, v2 = 0.0, cov = 0.0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double w = win[i * 11 + j];
                    const double d1 = a.at(x + j, y + i) - mu1;
                    const double d2 = b.at(x + j, y + i) - mu2;
                    v1 += w * d1 * d1;
                    v2 += w * d2 * d2;
                    cov += w * d1 * d2;
                }
            total += ((2.0 * mu1 * mu2 + C1) * (2.0 * cov + C2)) /
                     ((mu1 * mu1 + mu2 * mu2 + C1) * (v1 + v2 + C2));
            ++count;
        }
    return total / static_cast<double>(count);
}

struct MtfPoint {
    double rel_freq = 0.0;  // percent of the low-res sampling frequency
    double contrast = 0.0;  // (imax - imin)/(imax + imin)
    double imax = 0.0;
    double imin = 0.0;
};

// Contrast of a reconstructed line pattern. A margin of block + border pixels
// is excluded to keep boundary transients out of the measurement. The
// extremes are taken over the 1-D mean profile along each axis (the stimulus
// is constant along one axis; averaging along it isolates the modulation and
// suppresses the pixel-level speckle non-regular sampling produces), and the
// stronger direction wins.
inline MtfPoint contrast(const HiResImage& region, int margin = 18) {
    const int x0 = margin, y0 = margin;
    const int x1 = region.width - margin, y1 = region.height - margin;
    if (x1 - x0 < 2 || y1 - y0 < 2)
        throw std::invalid_argument("contrast: region degenerate after margin");
    std::vector<double> colmean(x1 - x0, 0.0), rowmean(y1 - y0, 0.0);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            colmean[x - x0] += region.at(x, y);
            rowmean[y - y0] += region.at(x, y);
        }
    for (double& v : colmean) v /= (y1 - y0);
    for (double& v : rowmean) v /= (x1 - x0);

    MtfPoint best;
    bool first = true;
    for (const auto* prof : {&colmean, &rowmean}) {
        double lo = (*prof)[0], hi = (*prof)[0];
        for (double v : *prof) {
            lo = v < lo ? v : lo;
            hi = v > hi ? v : hi;
        }
        const double c = (hi + lo) > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
        if (first || c > best.contrast) {
            best.contrast = c;
            best.imax = hi;
            best.imin = lo;
            first = false;
        }
    }
    return best;
}

enum class MtfAlgo { Jsde, Mp, Pe, Bicubic };

// One sinusoidal line pattern per frequency: acquire with the given layout,
// reconstruct with the given algorithm, measure contrast.
inline std::vector<MtfPoint> mtf_sweep(LayoutKind layout, MtfAlgo algo,
                                       const std::vector<double>& frequencies,
                                       std::uint64_t pattern_seed, int X, int Y,
                                       const JsdeParams& params = {}, int threads = 1) {
    for (double f : frequencies)
        if (!(f > 0.0 && f <= 100.0))
            throw std::invalid_argument("mtf_sweep: frequencies must be in (0,100]");
    const bool sparse = (algo == MtfAlgo::Jsde || algo == MtfAlgo::Mp);
    if (sparse && layout != LayoutKind::ThreeQuarterReg && layout != LayoutKind::ThreeQuarterNonReg)
        throw std::invalid_argument("mtf_sweep: sparse reconstruction needs a three-quarter layout");
    const QuadrantPattern pattern = generate_pattern(layout, X / 2, Y / 2, pattern_seed);
    const int margin = params.block_size + params.border_width;
    std::vector<MtfPoint> out;
    out.reserve(frequencies.size());
    for (double f : frequencies) {
        const SensorImage sensor = acquire(line_pattern(X, Y, f), pattern, layout);
        HiResImage rec;
        switch (algo) {
            case MtfAlgo::Jsde: rec = reconstruct(sensor, pattern, params, ReconAlgo::Jsde, threads); break;
            case MtfAlgo::Mp: rec = reconstruct(sensor, pattern, params, ReconAlgo::Mp, threads); break;
            case MtfAlgo::Pe: rec = pixel_enlargement(sensor); break;
            case MtfAlgo::Bicubic: rec = bicubic_x2(sensor); break;
        }
        MtfPoint p = contrast(rec, margin);
        p.rel_freq = f;
        out.push_back(p);
    }
    return out;
}

}  // namespace tqs
