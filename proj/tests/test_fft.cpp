#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "tqs/fft.hpp"
#include "tqs/random.hpp"

namespace {

using tqs::cdouble;

std::vector<cdouble> random_signal(std::size_t n, std::uint64_t seed) {
    tqs::SplitMix64 rng(seed);
    std::vector<cdouble> x(n);
    for (auto& v : x) v = {rng.uniform01() - 0.5, rng.uniform01() - 0.5};
    return x;
}

std::vector<cdouble> naive_dft(const std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    std::vector<cdouble> X(n);
    for (std::size_t k = 0; k < n; ++k) {
        cdouble acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, -tqs::detail::kTwoPi * double(k * j % n) / double(n));
        X[k] = acc;
    }
    return X;
}

double max_err(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Fft, MatchesNaiveDft) {
    for (std::size_t n : {1u, 2u, 8u, 18u, 20u, 27u, 32u}) {  // pow2 and Bluestein sizes
        auto x = random_signal(n, 100 + n);
        const auto want = naive_dft(x);
        tqs::FftPlan plan(n);
        std::vector<cdouble> scratch(plan.scratch_size());
        plan.forward(x.data(), scratch.data());
        EXPECT_LT(max_err(x, want), 1e-10 * double(n)) << "n " << n;
    }
}

TEST(Fft, InverseUndoesForward) {
    for (std::size_t n : {16u, 18u, 30u}) {
        const auto orig = random_signal(n, 7 * n);
        auto x = orig;
        tqs::FftPlan plan(n);
        std::vector<cdouble> scratch(plan.scratch_size());
        plan.forward(x.data(), scratch.data());
        plan.inverse(x.data(), scratch.data());
        EXPECT_LT(max_err(x, orig), 1e-12) << "n " << n;
    }
}

TEST(Fft, SingleBinImpulse) {
    // DFT of e^{+2*pi*i*3*j/16} is 16 at bin 3, 0 elsewhere
    const std::size_t n = 16;
    std::vector<cdouble> x(n);
    for (std::size_t j = 0; j < n; ++j)
        x[j] = std::polar(1.0, tqs::detail::kTwoPi * 3.0 * double(j) / double(n));
    tqs::FftPlan plan(n);
    std::vector<cdouble> scratch(plan.scratch_size());
    plan.forward(x.data(), scratch.data());
    for (std::size_t k = 0; k < n; ++k) {
        const double want = k == 3 ? 16.0 : 0.0;
        EXPECT_NEAR(std::abs(x[k]), want, 1e-12) << "k " << k;
    }
}

TEST(Fft, RejectsEmpty) { EXPECT_THROW(tqs::FftPlan(0), std::invalid_argument); }

TEST(Fft2, MatchesNaive2d) {
    // column-major layout data[m + n*M]; one pow2 axis, one Bluestein axis
    const std::size_t M = 6, N = 8;
    auto x = random_signal(M * N, 55);
    auto got = x;
    tqs::Fft2 fft(M, N);
    std::vector<cdouble> work;
    fft.forward(got.data(), work);

    for (std::size_t k1 = 0; k1 < M; ++k1)
        for (std::size_t k2 = 0; k2 < N; ++k2) {
            cdouble acc(0.0, 0.0);
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t n = 0; n < N; ++n)
                    acc += x[m + n * M] *
                           std::polar(1.0, -tqs::detail::kTwoPi *
                                               (double(k1 * m) / double(M) +
                                                double(k2 * n) / double(N)));
            EXPECT_NEAR(std::abs(got[k1 + k2 * M] - acc), 0.0, 1e-10)
                << "k1 " << k1 << " k2 " << k2;
        }
}

TEST(Fft2, ReusedWorkBufferIsSafe) {
    tqs::Fft2 small(4, 4), big(8, 8);
    std::vector<cdouble> work;
    auto a = random_signal(64, 1);
    big.forward(a.data(), work);  // grows work
    auto b = random_signal(16, 2);
    auto b2 = b;
    small.forward(b.data(), work);  // reuses the larger buffer
    std::vector<cdouble> fresh;
    tqs::Fft2(4, 4).forward(b2.data(), fresh);
    EXPECT_EQ(max_err(b, b2), 0.0);  // same plan shape, same arithmetic
}
