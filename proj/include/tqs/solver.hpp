#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tqs/fft.hpp"
#include "tqs/image.hpp"

namespace tqs {

struct JsdeParams {
    int block_size = 4;     // B, even
    int border_width = 14;  // W, even
    int iterations = 100;   // I
    double rho = 0.7;       // weighting decay
    double gamma = 0.5;     // orthogonality deficiency compensation
};

enum class ReconAlgo { Jsde, Mp };

inline constexpr double kDenEps = 1e-12;

// Scores within this relative tolerance count as tied and resolve to the
// smallest k. Regular layouts make the four spectral aliases of a frequency
// score EXACTLY equal (the per-group atom factor cancels between numerator
// and denominator), and the smallest-index alias is the only one whose
// sensor footprint is guaranteed well-conditioned; letting FFT rounding
// noise pick the winner occasionally selects a near-invisible atom whose
// projection coefficient is wildly inflated, wrecking the insensitive
// quadrant. A strict tolerance keeps genuine maxima intact.
inline constexpr double kTieEps = 1e-9;

// One reconstruction area: a block plus its border, clipped to the image.
// Vectors use the group scan order (groups column-major, within a group
// column-major), so group g occupies flat indices [4g, 4g+4).
struct BlockContext {
    int x0 = 0, y0 = 0;    // block origin on the fine grid
    int ax0 = 0, ay0 = 0;  // area origin (even)
    int M = 0;             // area height (rows, index m)
    int N = 0;             // area width (columns, index n)
    std::vector<double> f_tilde;        // (M*N)/4 sensor values, group scan order
    std::vector<std::uint8_t> codes;    // per-group discarded quadrant
    std::vector<double> w;              // M*N weights, zero on insensitive set
    std::vector<std::uint8_t> sensitive;  // M*N membership of set A

    int groups() const { return (M / 2) * (N / 2); }
};

struct SparseModel {
    std::map<int, cdouble> coefficients;  // c_k over selected k
    std::vector<cdouble> g;               // model, scan order
    std::vector<cdouble> r;               // residual, scan order
    int iterations = 0;
    bool fallback = false;  // no selectable atom; model degraded to D*f_tilde
};

// --- scan order -------------------------------------------------------------

inline int scan_index(int m, int n, int M, int N) {
    if (m < 0 || m >= M || n < 0 || n >= N)
        throw std::out_of_range("scan_index: position outside area");
    return 4 * ((m / 2) + (n / 2) * (M / 2)) + (m % 2) + 2 * (n % 2);
}

inline std::pair<int, int> scan_inverse(int idx, int M, int N) {
    if (idx < 0 || idx >= M * N) throw std::out_of_range("scan_inverse: index outside area");
    const int g = idx / 4, c = idx % 4;
    return {2 * (g % (M / 2)) + (c & 1), 2 * (g / (M / 2)) + (c >> 1)};
}

// --- aggregation / distribution ---------------------------------------------

// Matrix A: per group, the mean of the three non-discarded entries.
template <class T>
std::vector<T> aggregate(const std::vector<T>& area_values, const std::vector<std::uint8_t>& codes) {
    if (area_values.size() != 4 * codes.size())
        throw std::invalid_argument("aggregate: length mismatch");
    std::vector<T> out(codes.size());
    for (std::size_t g = 0; g < codes.size(); ++g) {
        const T* q = &area_values[4 * g];
        out[g] = (q[0] + q[1] + q[2] + q[3] - q[codes[g]]) / 3.0;
    }
    return out;
}

// Matrix D: copy each sensor value to all four positions of its group.
template <class T>
std::vector<T> distribute(const std::vector<T>& sensor_values) {
    std::vector<T> out(4 * sensor_values.size());
    for (std::size_t g = 0; g < sensor_values.size(); ++g)
        for (int c = 0; c < 4; ++c) out[4 * g + c] = sensor_values[g];
    return out;
}

// --- weighting, basis, prior ------------------------------------------------

// w[m,n] = rho^dist(center) on the sensitive set, 0 elsewhere.
inline std::vector<double> weight_function(const BlockContext& ctx, double rho) {
    std::vector<double> w(static_cast<std::size_t>(ctx.M) * ctx.N, 0.0);
    const double cm = (ctx.M - 1) / 2.0, cn = (ctx.N - 1) / 2.0;
    for (int n = 0; n < ctx.N; ++n)
        for (int m = 0; m < ctx.M; ++m) {
            const int i = scan_index(m, n, ctx.M, ctx.N);
            if (!ctx.sensitive[i]) continue;
            const double d = std::sqrt((m - cm) * (m - cm) + (n - cn) * (n - cn));
            w[i] = std::pow(rho, d);
        }
    return w;
}

// phi_k[m,n] = e^{2*pi*j*k1*m/M} e^{2*pi*j*k2*n/N}, k1 = k mod M, k2 = floor(k/M)
inline std::vector<cdouble> basis_function(int k, int M, int N) {
    if (k < 0 || k >= M * N) throw std::out_of_range("basis_function: k outside [0, M*N)");
    const int k1 = k % M, k2 = k / M;
    std::vector<cdouble> em(M), en(N);
    for (int m = 0; m < M; ++m) em[m] = std::polar(1.0, detail::kTwoPi * k1 * m / M);
    for (int n = 0; n < N; ++n) en[n] = std::polar(1.0, detail::kTwoPi * k2 * n / N);
    std::vector<cdouble> phi(static_cast<std::size_t>(M) * N);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m) phi[scan_index(m, n, M, N)] = em[m] * en[n];
    return phi;
}

// OTF-inspired prior, implemented exactly as printed (note the k/N in the
// vertical fold; it matches k/M on the square areas the defaults produce).
inline double frequency_prior(int k, int M, int N) {
    if (k < 0 || k >= M * N) throw std::out_of_range("frequency_prior: k outside [0, M*N)");
    const double k1 = k % M;
    const double j2 = k / N;
    const double kt1 = M / 2.0 - std::fabs(k1 - M / 2.0);
    const double kt2 = N / 2.0 - std::fabs(j2 - N / 2.0);
    const double t = 1.0 - std::sqrt(2.0) * std::sqrt(kt1 * kt1 / (double(M) * M) + kt2 * kt2 / (double(N) * N));
    return t * t;
}

// --- direct (reference) evaluation of the selection quantities ---------------

// (D A phi_k)^H W r, evaluated literally; O(M*N) per k.
inline cdouble numerator_direct(int k, const std::vector<cdouble>& r, const BlockContext& ctx) {
    const auto phi = basis_function(k, ctx.M, ctx.N);
    const auto dv = distribute(aggregate(phi, ctx.codes));
    cdouble acc(0.0, 0.0);
    for (std::size_t i = 0; i < dv.size(); ++i) acc += std::conj(dv[i]) * ctx.w[i] * r[i];
    return acc;
}

// (D A phi_k)^H W (D A phi_k), evaluated literally.
inline double denominator_direct(int k, const BlockContext& ctx) {
    const auto phi = basis_function(k, ctx.M, ctx.N);
    const auto dv = distribute(aggregate(phi, ctx.codes));
    double acc = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) acc += ctx.w[i] * std::norm(dv[i]);
    return acc;
}

inline cdouble projection_coefficient(int k, const std::vector<cdouble>& r, const BlockContext& ctx) {
    const double den = denominator_direct(k, ctx);
    if (den <= kDenEps)
        throw std::domain_error("projection_coefficient: degenerate denominator");
    return numerator_direct(k, r, ctx) / den;
}

// --- fast paths ---------------------------------------------------------------

// All numerators at once: the 2-D DFT of the auxiliary array that carries, at
// each sensitive position, one third of the W-weighted group sum of r.
// Output is indexed by k = k1 + k2*M.
inline std::vector<cdouble> numerators_all(const std::vector<cdouble>& r, const BlockContext& ctx) {
    const int M = ctx.M, N = ctx.N, G = ctx.groups();
    std::vector<cdouble> t(static_cast<std::size_t>(M) * N, cdouble(0.0, 0.0));
    for (int g = 0; g < G; ++g) {
        cdouble gs(0.0, 0.0);
        for (int c = 0; c < 4; ++c) gs += ctx.w[4 * g + c] * r[4 * g + c];
        gs /= 3.0;
        const int base = 2 * (g % (M / 2)) + 2 * (g / (M / 2)) * M;
        for (int c = 0; c < 4; ++c)
            if (c != ctx.codes[g]) t[base + (c & 1) + (c >> 1) * M] = gs;
    }
    Fft2 fft(M, N);
    std::vector<cdouble> work;
    fft.forward(t.data(), work);
    return t;
}

namespace detail {

// pair-offset counts per discarded code: counts[c][dm+1][dn+1] = number of
// ordered kept-pairs in the group at within-group offset (dm, dn)
inline const int (*pair_counts())[3][3] {
    static int counts[4][3][3];
    static const bool init = [] {
        for (int c = 0; c < 4; ++c)
            for (int a = 0; a < 4; ++a) {
                if (a == c) continue;
                for (int b = 0; b < 4; ++b) {
                    if (b == c) continue;
                    const int dm = (a & 1) - (b & 1), dn = (a >> 1) - (b >> 1);
                    ++counts[c][dm + 1][dn + 1];
                }
            }
        return true;
    }();
    (void)init;
    return counts;
}

}  // namespace detail

// All denominators via the 9-term expansion over within-group offsets;
// computed once per block. Output indexed like numerators_all.
inline std::vector<double> denominators_all(const BlockContext& ctx) {
    const int M = ctx.M, N = ctx.N, G = ctx.groups();
    const auto* counts = detail::pair_counts();
    double C[3][3] = {};
    for (int g = 0; g < G; ++g) {
        double wtot = 0.0;
        for (int c = 0; c < 4; ++c) wtot += ctx.w[4 * g + c];
        const auto& cc = counts[ctx.codes[g]];
        for (int dm = 0; dm < 3; ++dm)
            for (int dn = 0; dn < 3; ++dn) C[dm][dn] += wtot * cc[dm][dn];
    }
    for (auto& row : C)
        for (double& v : row) v /= 9.0;

    std::vector<double> den(static_cast<std::size_t>(M) * N);
    std::vector<cdouble> em(M), en(N);
    for (int k1 = 0; k1 < M; ++k1) em[k1] = std::polar(1.0, detail::kTwoPi * k1 / M);
    for (int k2 = 0; k2 < N; ++k2) en[k2] = std::polar(1.0, detail::kTwoPi * k2 / N);
    for (int k2 = 0; k2 < N; ++k2) {
        const cdouble eN[3] = {std::conj(en[k2]), cdouble(1.0, 0.0), en[k2]};
        for (int k1 = 0; k1 < M; ++k1) {
            const cdouble eM[3] = {std::conj(em[k1]), cdouble(1.0, 0.0), em[k1]};
            double acc = 0.0;
            for (int dm = 0; dm < 3; ++dm)
                for (int dn = 0; dn < 3; ++dn)
                    acc += C[dm][dn] * (eM[dm].real() * eN[dn].real() - eM[dm].imag() * eN[dn].imag());
            den[k1 + static_cast<std::size_t>(k2) * M] = acc < 0.0 ? 0.0 : acc;
        }
    }
    return den;
}

// argmax_k q_k |num_k|^2 / den_k; ties (within kTieEps relative) go to the
// smallest k; returns -1 when every denominator is degenerate.
inline int select_basis(const std::vector<cdouble>& r, const BlockContext& ctx,
                        const std::vector<double>& priors) {
    const auto num = numerators_all(r, ctx);
    const auto den = denominators_all(ctx);
    int best = -1;
    double best_score = -1.0;
    for (std::size_t k = 0; k < num.size(); ++k) {
        if (den[k] <= kDenEps) continue;
        const double score = priors[k] * std::norm(num[k]) / den[k];
        if (score > best_score * (1.0 + kTieEps)) {
            best_score = score;
            best = static_cast<int>(k);
        }
    }
    return best;
}

// --- greedy model generation ---------------------------------------------------

namespace detail {

struct AreaPlan {
    int M, N, G;
    Fft2 fft;
    std::vector<double> prior;      // q_k, k = k1 + k2*M
    std::vector<cdouble> rootM;     // e^{+2*pi*i t/M}
    std::vector<cdouble> rootN;
    std::vector<int> gbase;         // fft-layout index of each group's corner
    std::vector<double> wbase;      // rho^dist, scan order (pattern-independent)

    AreaPlan(int M_, int N_, double rho)
        : M(M_), N(N_), G((M_ / 2) * (N_ / 2)), fft(M_, N_),
          prior(static_cast<std::size_t>(M_) * N_),
          rootM(M_), rootN(N_), gbase(G),
          wbase(static_cast<std::size_t>(M_) * N_) {
        // the prior's vertical fold only indexes correctly on square areas;
        // reconstruction always produces square areas, but hand-built
        // rectangular contexts fall back to a uniform prior
        for (int k = 0; k < M * N; ++k) prior[k] = (M == N) ? frequency_prior(k, M, N) : 1.0;
        for (int t = 0; t < M; ++t) rootM[t] = std::polar(1.0, kTwoPi * t / M);
        for (int t = 0; t < N; ++t) rootN[t] = std::polar(1.0, kTwoPi * t / N);
        for (int g = 0; g < G; ++g)
            gbase[g] = 2 * (g % (M / 2)) + 2 * (g / (M / 2)) * M;
        const double cm = (M - 1) / 2.0, cn = (N - 1) / 2.0;
        for (int n = 0; n < N; ++n)
            for (int m = 0; m < M; ++m)
                wbase[scan_index(m, n, M, N)] =
                    std::pow(rho, std::sqrt((m - cm) * (m - cm) + (n - cn) * (n - cn)));
    }
};

struct Workspace {
    std::vector<cdouble> r, t, fftwork;
    std::vector<double> den, score_w;  // score_w[k] = q_k/den_k (0 if unselectable)
    std::vector<cdouble> pm, pn;
};

struct GreedyResult {
    std::map<int, cdouble> coeffs;
    bool fallback = false;
};

// Algorithm: g=0, r=D f~; per iteration select u by the prior-weighted score,
// p = num_u/den_u, accumulate gamma*p into c_u, subtract gamma*p*D A phi_u
// from r. ws.r holds the final residual.
inline GreedyResult run_greedy(const BlockContext& ctx, const AreaPlan& plan,
                               const JsdeParams& params, bool use_prior, Workspace& ws) {
    const int M = plan.M, N = plan.N, G = plan.G;
    const std::size_t MN = static_cast<std::size_t>(M) * N;
    GreedyResult res;

    ws.r.resize(MN);
    for (int g = 0; g < G; ++g)
        for (int c = 0; c < 4; ++c) ws.r[4 * g + c] = ctx.f_tilde[g];

    ws.den = denominators_all(ctx);
    ws.score_w.assign(MN, 0.0);
    bool any = false;
    for (std::size_t k = 0; k < MN; ++k) {
        if (ws.den[k] > kDenEps) {
            ws.score_w[k] = (use_prior ? plan.prior[k] : 1.0) / ws.den[k];
            any = true;
        }
    }
    if (!any) {
        res.fallback = true;
        return res;
    }

    ws.t.resize(MN);
    ws.pm.resize(M / 2);
    ws.pn.resize(N / 2);
    const double gamma = params.gamma;

    for (int it = 0; it < params.iterations; ++it) {
        std::fill(ws.t.begin(), ws.t.end(), cdouble(0.0, 0.0));
        for (int g = 0; g < G; ++g) {
            const double* wg = &ctx.w[4 * g];
            const cdouble* rg = &ws.r[4 * g];
            cdouble gs = wg[0] * rg[0] + wg[1] * rg[1] + wg[2] * rg[2] + wg[3] * rg[3];
            gs /= 3.0;
            const int base = plan.gbase[g];
            const int code = ctx.codes[g];
            for (int c = 0; c < 4; ++c)
                if (c != code) ws.t[base + (c & 1) + (c >> 1) * M] = gs;
        }
        plan.fft.forward(ws.t.data(), ws.fftwork);

        int u = -1;
        double best = -1.0;
        for (std::size_t k = 0; k < MN; ++k) {
            const double s = ws.score_w[k] * std::norm(ws.t[k]);
            if (s > best * (1.0 + kTieEps) && ws.den[k] > kDenEps) {
                best = s;
                u = static_cast<int>(k);
            }
        }
        const cdouble p = ws.t[u] / ws.den[u];
        const cdouble gp = gamma * p;
        res.coeffs[u] += gp;

        const int u1 = u % M, u2 = u / M;
        for (int gm = 0; gm < M / 2; ++gm) ws.pm[gm] = plan.rootM[(u1 * 2 * gm) % M];
        for (int gn = 0; gn < N / 2; ++gn) ws.pn[gn] = plan.rootN[(u2 * 2 * gn) % N];
        const cdouble em = plan.rootM[u1], en = plan.rootN[u2];
        const cdouble qv[4] = {cdouble(1.0, 0.0), em, en, cmul(em, en)};
        cdouble scaled[4];  // gamma*p * (mean of the three kept quadrant phases)
        const cdouble qsum = qv[0] + qv[1] + qv[2] + qv[3];
        for (int c = 0; c < 4; ++c) scaled[c] = cmul(gp, (qsum - qv[c]) / 3.0);

        int g = 0;
        for (int gn = 0; gn < N / 2; ++gn) {
            const cdouble col = ws.pn[gn];
            for (int gm = 0; gm < M / 2; ++gm, ++g) {
                const cdouble d = cmul(scaled[ctx.codes[g]], cmul(ws.pm[gm], col));
                cdouble* rg = &ws.r[4 * g];
                rg[0] -= d;
                rg[1] -= d;
                rg[2] -= d;
                rg[3] -= d;
            }
        }
    }
    return res;
}

}  // namespace detail

// Full model generation for one block. MP differs from JSDE by uniform
// weights (build the context with rho = 1), no prior, and gamma = 1; pass
// use_prior accordingly.
inline SparseModel jsde_model(const BlockContext& ctx, const JsdeParams& params,
                              bool use_prior = true) {
    if (ctx.M % 2 || ctx.N % 2 || ctx.M <= 0 || ctx.N <= 0)
        throw std::invalid_argument("jsde_model: area dims must be positive and even");
    detail::AreaPlan plan(ctx.M, ctx.N, params.rho);
    detail::Workspace ws;
    auto res = detail::run_greedy(ctx, plan, params, use_prior, ws);

    SparseModel model;
    model.iterations = res.fallback ? 0 : params.iterations;
    model.fallback = res.fallback;
    const std::size_t MN = static_cast<std::size_t>(ctx.M) * ctx.N;
    model.g.assign(MN, cdouble(0.0, 0.0));
    if (res.fallback) {
        // degraded block: model carries D f~ directly (pixel enlargement)
        for (int g = 0; g < plan.G; ++g)
            for (int c = 0; c < 4; ++c) model.g[4 * g + c] = ctx.f_tilde[g];
        model.r.assign(MN, cdouble(0.0, 0.0));
        const auto back = distribute(aggregate(model.g, ctx.codes));
        for (std::size_t i = 0; i < MN; ++i) model.r[i] = model.g[i] - back[i];
        return model;
    }
    model.coefficients = std::move(res.coeffs);
    std::vector<cdouble> emf(ctx.M), enf(ctx.N);
    for (const auto& [k, c] : model.coefficients) {
        const int k1 = k % ctx.M, k2 = k / ctx.M;
        for (int m = 0; m < ctx.M; ++m) emf[m] = plan.rootM[(k1 * m) % ctx.M];
        for (int n = 0; n < ctx.N; ++n) enf[n] = plan.rootN[(k2 * n) % ctx.N];
        for (int g = 0; g < plan.G; ++g) {
            const int m0 = 2 * (g % (ctx.M / 2)), n0 = 2 * (g / (ctx.M / 2));
            for (int cc = 0; cc < 4; ++cc)
                model.g[4 * g + cc] +=
                    detail::cmul(c, detail::cmul(emf[m0 + (cc & 1)], enf[n0 + (cc >> 1)]));
        }
    }
    model.r = std::move(ws.r);
    return model;
}

// Builds the context for block (bx, by): area = block grown by border_width on
// every side, edges snapped outward to even coordinates so groups stay intact.
// The area is NOT shrunk at the image boundary; positions outside the image
// are insensitive (w = 0) and their groups carry f~ = 0, so they contribute
// nothing to any weighted inner product.
inline BlockContext build_block_context(const SensorImage& sensor, const QuadrantPattern& pattern,
                                        int bx, int by, const JsdeParams& params, double rho) {
    const int B = params.block_size, W = params.border_width;
    BlockContext ctx;
    ctx.x0 = bx * B;
    ctx.y0 = by * B;
    ctx.ax0 = ctx.x0 - W - ((ctx.x0 - W) & 1);
    ctx.ay0 = ctx.y0 - W - ((ctx.y0 - W) & 1);
    const int ax1 = ctx.x0 + B + W + ((ctx.x0 + B + W) & 1);
    const int ay1 = ctx.y0 + B + W + ((ctx.y0 + B + W) & 1);
    ctx.N = ax1 - ctx.ax0;
    ctx.M = ay1 - ctx.ay0;
    const int G = ctx.groups();
    ctx.f_tilde.resize(G);
    ctx.codes.resize(G);
    ctx.sensitive.assign(static_cast<std::size_t>(ctx.M) * ctx.N, 0);
    for (int g = 0; g < G; ++g) {
        const int gm = g % (ctx.M / 2), gn = g / (ctx.M / 2);
        const int sx = ctx.ax0 / 2 + gn, sy = ctx.ay0 / 2 + gm;
        if (sx < 0 || sx >= sensor.width || sy < 0 || sy >= sensor.height) {
            ctx.f_tilde[g] = 0.0;
            ctx.codes[g] = 0;
            continue;
        }
        ctx.f_tilde[g] = sensor.at(sx, sy);
        ctx.codes[g] = pattern.at(sx, sy);
        for (int c = 0; c < 4; ++c) ctx.sensitive[4 * g + c] = (c != ctx.codes[g]) ? 1 : 0;
    }
    ctx.w = weight_function(ctx, rho);
    return ctx;
}

// Block-wise reconstruction of the fine grid. Blocks are independent;
// the output is bitwise identical for any thread count.
inline HiResImage reconstruct(const SensorImage& sensor, const QuadrantPattern& pattern,
                              const JsdeParams& params = {}, ReconAlgo algo = ReconAlgo::Jsde,
                              int threads = 1) {
    if (pattern.meaning != PatternMeaning::Discarded)
        throw std::invalid_argument("reconstruct: needs a DISCARDED-meaning (three-quarter) pattern");
    if (sensor.width != pattern.width || sensor.height != pattern.height)
        throw std::invalid_argument("reconstruct: sensor and pattern dims differ");
    if (params.block_size < 2 || params.block_size % 2 || params.border_width < 0 ||
        params.iterations < 0)
        throw std::invalid_argument("reconstruct: bad parameters");

    JsdeParams eff = params;
    const bool use_prior = (algo == ReconAlgo::Jsde);
    if (algo == ReconAlgo::Mp) {
        eff.gamma = 1.0;
        eff.rho = 1.0;
    }

    const int X = 2 * sensor.width, Y = 2 * sensor.height;
    const int B = eff.block_size;
    const int nbx = (X + B - 1) / B, nby = (Y + B - 1) / B;

    // plan cache for every distinct area shape (built serially up front)
    std::map<std::pair<int, int>, std::unique_ptr<detail::AreaPlan>> plans;
    auto area_dim = [&](int o) {
        const int lo = o - eff.border_width - ((o - eff.border_width) & 1);
        const int hi = o + B + eff.border_width + ((o + B + eff.border_width) & 1);
        return hi - lo;
    };
    for (int by = 0; by < nby; ++by)
        for (int bx = 0; bx < nbx; ++bx) {
            const std::pair<int, int> key{area_dim(by * B), area_dim(bx * B)};
            auto& slot = plans[key];
            if (!slot) slot = std::make_unique<detail::AreaPlan>(key.first, key.second, eff.rho);
        }

    HiResImage out(X, Y);
    std::atomic<int> next{0};
    std::atomic<bool> any_fallback{false};
    const int total = nbx * nby;
    int nthreads = threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
    if (nthreads < 1) nthreads = 1;
    if (nthreads > total) nthreads = total;

    auto worker = [&]() {
        detail::Workspace ws;
        BlockContext ctx;
        std::vector<cdouble> acc(static_cast<std::size_t>(B) * B);
        for (;;) {
            const int idx = next.fetch_add(1, std::memory_order_relaxed);
            if (idx >= total) break;
            const int bx = idx % nbx, by = idx / nbx;
            ctx = BlockContext{};
            ctx.x0 = bx * B;
            ctx.y0 = by * B;
            ctx.ax0 = ctx.x0 - eff.border_width - ((ctx.x0 - eff.border_width) & 1);
            ctx.ay0 = ctx.y0 - eff.border_width - ((ctx.y0 - eff.border_width) & 1);
            ctx.N = ctx.x0 + B + eff.border_width + ((ctx.x0 + B + eff.border_width) & 1) - ctx.ax0;
            ctx.M = ctx.y0 + B + eff.border_width + ((ctx.y0 + B + eff.border_width) & 1) - ctx.ay0;
            const detail::AreaPlan& plan = *plans.at({ctx.M, ctx.N});
            const int G = plan.G;
            ctx.f_tilde.resize(G);
            ctx.codes.resize(G);
            ctx.w.assign(static_cast<std::size_t>(ctx.M) * ctx.N, 0.0);
            for (int g = 0; g < G; ++g) {
                const int gm = g % (ctx.M / 2), gn = g / (ctx.M / 2);
                const int sx = ctx.ax0 / 2 + gn, sy = ctx.ay0 / 2 + gm;
                if (sx < 0 || sx >= sensor.width || sy < 0 || sy >= sensor.height) {
                    ctx.f_tilde[g] = 0.0;
                    ctx.codes[g] = 0;
                    continue;
                }
                ctx.f_tilde[g] = sensor.at(sx, sy);
                const int code = pattern.at(sx, sy);
                ctx.codes[g] = static_cast<std::uint8_t>(code);
                for (int c = 0; c < 4; ++c)
                    if (c != code) ctx.w[4 * g + c] = plan.wbase[4 * g + c];
            }

            auto res = detail::run_greedy(ctx, plan, eff, use_prior, ws);

            const int xe = std::min(X, ctx.x0 + B), ye = std::min(Y, ctx.y0 + B);
            if (res.fallback) {
                any_fallback.store(true, std::memory_order_relaxed);
                for (int y = ctx.y0; y < ye; ++y)
                    for (int x = ctx.x0; x < xe; ++x)
                        out.at(x, y) = sensor.at(x / 2, y / 2);
                continue;
            }
            // materialize only the central B x B samples from the coefficients
            const int bw = xe - ctx.x0, bh = ye - ctx.y0;
            std::fill(acc.begin(), acc.begin() + bw * bh, cdouble(0.0, 0.0));
            const int m0 = ctx.y0 - ctx.ay0, n0 = ctx.x0 - ctx.ax0;
            for (const auto& [k, coeff] : res.coeffs) {
                const int k1 = k % ctx.M, k2 = k / ctx.M;
                for (int dy = 0; dy < bh; ++dy) {
                    const cdouble pmv = detail::cmul(coeff, plan.rootM[(k1 * (m0 + dy)) % ctx.M]);
                    for (int dx = 0; dx < bw; ++dx)
                        acc[dy * bw + dx] += detail::cmul(pmv, plan.rootN[(k2 * (n0 + dx)) % ctx.N]);
                }
            }
            for (int dy = 0; dy < bh; ++dy)
                for (int dx = 0; dx < bw; ++dx)
                    out.at(ctx.x0 + dx, ctx.y0 + dy) = acc[dy * bw + dx].real();
        }
    };

    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (any_fallback.load())
        std::cerr << "tqs: warning: degenerate block(s) fell back to pixel enlargement\n";
    return out;
}

}  // namespace tqs
