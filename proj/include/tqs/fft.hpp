#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace tqs {

using cdouble = std::complex<double>;

namespace detail {
inline constexpr double kTwoPi = 6.28318530717958647692;

// plain complex multiply; the operator* on std::complex routes through the
// IEEE-pedantic __muldc3 helper, which dominates the solver hot loops
inline cdouble cmul(const cdouble& a, const cdouble& b) {
    return cdouble(a.real() * b.real() - a.imag() * b.imag(),
                   a.real() * b.imag() + a.imag() * b.real());
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace detail

// Deterministic self-contained FFT: iterative radix-2 for power-of-two sizes,
// Bluestein's chirp-z transform otherwise (boundary reconstruction areas have
// sizes like 18..30). Forward is the plain unnormalized DFT sum with
// e^{-2*pi*i/n} kernel; inverse divides by n.
class FftPlan {
  public:
    explicit FftPlan(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("FftPlan: size must be positive");
        if (detail::is_pow2(n)) {
            init_pow2(n);
        } else {
            // Bluestein: x_k -> chirp-modulated convolution of length L >= 2n-1
            const std::size_t L = detail::next_pow2(2 * n - 1);
            sub_ = std::make_unique<FftPlan>(L);
            chirp_.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                // j^2 mod 2n keeps the angle argument small and exact
                std::size_t j2 = (j * j) % (2 * n);
                double ang = -detail::kTwoPi * 0.5 * static_cast<double>(j2) / static_cast<double>(n);
                chirp_[j] = {std::cos(ang), std::sin(ang)};
            }
            bfft_.assign(L, cdouble(0.0, 0.0));
            bfft_[0] = std::conj(chirp_[0]);
            for (std::size_t j = 1; j < n; ++j)
                bfft_[j] = bfft_[L - j] = std::conj(chirp_[j]);
            std::vector<cdouble> scratch(L);
            sub_->forward(bfft_.data(), scratch.data());
        }
    }

    std::size_t size() const { return n_; }

    // complex elements of scratch required by forward/inverse
    std::size_t scratch_size() const { return sub_ ? 2 * sub_->size() : 0; }

    void forward(cdouble* x, cdouble* scratch) const {
        if (!sub_) {
            fft_pow2(x);
            return;
        }
        const std::size_t L = sub_->size();
        cdouble* a = scratch;
        cdouble* s2 = scratch + L;
        for (std::size_t j = 0; j < n_; ++j) a[j] = detail::cmul(x[j], chirp_[j]);
        for (std::size_t j = n_; j < L; ++j) a[j] = cdouble(0.0, 0.0);
        sub_->forward(a, s2);
        for (std::size_t j = 0; j < L; ++j) a[j] = detail::cmul(a[j], bfft_[j]);
        sub_->inverse(a, s2);
        for (std::size_t k = 0; k < n_; ++k) x[k] = detail::cmul(a[k], chirp_[k]);
    }

    void inverse(cdouble* x, cdouble* scratch) const {
        for (std::size_t i = 0; i < n_; ++i) x[i] = std::conj(x[i]);
        forward(x, scratch);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = std::conj(x[i]) * inv;
    }

  private:
    void init_pow2(std::size_t n) {
        bitrev_.resize(n);
        bitrev_[0] = 0;
        std::size_t log2n = 0;
        while ((std::size_t(1) << log2n) < n) ++log2n;
        for (std::size_t i = 1; i < n; ++i)
            bitrev_[i] = (bitrev_[i >> 1] >> 1) | ((i & 1) << (log2n - 1));
        tw_.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            double ang = -detail::kTwoPi * static_cast<double>(j) / static_cast<double>(n);
            tw_[j] = {std::cos(ang), std::sin(ang)};
        }
    }

    void fft_pow2(cdouble* x) const {
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = bitrev_[i];
            if (i < j) std::swap(x[i], x[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t base = 0; base < n; base += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cdouble w = tw_[j * step];
                    cdouble u = x[base + j];
                    cdouble v = detail::cmul(x[base + j + half], w);
                    x[base + j] = u + v;
                    x[base + j + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<cdouble> tw_;
    std::unique_ptr<FftPlan> sub_;  // Bluestein-only
    std::vector<cdouble> chirp_;
    std::vector<cdouble> bfft_;
};

// 2-D transform over data stored column-major as data[m + n*M]
// (m = row index, contiguous; n = column index). Output keeps the same
// layout: F[k1 + k2*M].
class Fft2 {
  public:
    Fft2(std::size_t M, std::size_t N) : M_(M), N_(N), pm_(M), pn_(N) {}

    std::size_t rows() const { return M_; }
    std::size_t cols() const { return N_; }

    // work is resized as needed; callers reuse it across invocations
    void forward(cdouble* data, std::vector<cdouble>& work) const {
        const std::size_t need = N_ + pn_.scratch_size() + pm_.scratch_size();
        if (work.size() < need) work.resize(need);
        cdouble* colbuf = work.data();
        cdouble* scratch_n = work.data() + N_;
        cdouble* scratch_m = scratch_n;  // disjoint passes may share
        for (std::size_t n = 0; n < N_; ++n) pm_.forward(data + n * M_, scratch_m);
        for (std::size_t m = 0; m < M_; ++m) {
            for (std::size_t n = 0; n < N_; ++n) colbuf[n] = data[m + n * M_];
            pn_.forward(colbuf, scratch_n);
            for (std::size_t n = 0; n < N_; ++n) data[m + n * M_] = colbuf[n];
        }
    }

  private:
    std::size_t M_, N_;
    FftPlan pm_, pn_;
};

}  // namespace tqs
