#pragma once

// Mixed-radix decimation-in-time DFT. Every prime factor p of the length is
// handled by a direct size-p butterfly, so prime lengths reduce to plain
// direct summation.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace hfp::detail {

using cd = std::complex<double>;

inline std::size_t smallest_prime_factor(std::size_t n) noexcept {
    if (n % 2 == 0) return 2;
    for (std::size_t p = 3; p * p <= n; p += 2) {
        if (n % p == 0) return p;
    }
    return n;
}

/// Table of exp(-2 pi i j / N), j = 0..N-1.
inline std::vector<cd> twiddles(std::size_t N) {
    std::vector<cd> w(N);
    const double step = -2.0 * std::numbers::pi / static_cast<double>(N);
    for (std::size_t j = 0; j < N; ++j) {
        // fold to the shortest angle so sin/cos stay accurate near j ~ N
        const auto jj = static_cast<double>(j <= N / 2 ? static_cast<long long>(j) : static_cast<long long>(j) - static_cast<long long>(N));
        w[j] = std::polar(1.0, step * jj);
    }
    return w;
}

class FourierPlan {
public:
    explicit FourierPlan(std::size_t N) : N_(N), w_(twiddles(N)) {}

    [[nodiscard]] std::size_t size() const noexcept { return N_; }

    void forward(std::span<const cd> in, std::span<cd> out) const { transform(in.data(), 1, N_, out.data()); }

private:
    // W_n^e for a sub-transform of length n dividing N.
    [[nodiscard]] cd root(std::size_t n, std::size_t e) const noexcept { return w_[(e % n) * (N_ / n)]; }

    void transform(const cd* in, std::size_t stride, std::size_t n, cd* out) const {
        if (n == 1) {
            out[0] = in[0];
            return;
        }
        const std::size_t p = smallest_prime_factor(n);
        const std::size_t m = n / p;
        if (m == 1) {
            for (std::size_t k = 0; k < n; ++k) {
                cd acc{0.0, 0.0};
                for (std::size_t l = 0; l < n; ++l) acc += in[l * stride] * root(n, l * k);
                out[k] = acc;
            }
            return;
        }
        for (std::size_t r = 0; r < p; ++r) transform(in + r * stride, stride * p, m, out + r * m);

        std::vector<cd> combined(n);
        std::vector<cd> twisted(p);
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t r = 0; r < p; ++r) twisted[r] = out[r * m + k] * root(n, r * k);
            for (std::size_t q = 0; q < p; ++q) {
                cd acc{0.0, 0.0};
                for (std::size_t r = 0; r < p; ++r) acc += twisted[r] * root(p, r * q);
                combined[k + q * m] = acc;
            }
        }
        std::copy(combined.begin(), combined.end(), out);
    }

    std::size_t N_;
    std::vector<cd> w_;
};

} // namespace hfp::detail
