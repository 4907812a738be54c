#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's transforms or solvers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hfp/spectral.hpp"

namespace oracle {

using cd = std::complex<double>;
using cld = std::complex<long double>;

/// O(N^2) direct summation in long double. The twiddle index is reduced
/// mod N and looked up in a table of exp(-2 pi i k / N).
inline std::vector<cd> direct_dft(const std::vector<cd>& x) {
    const std::size_t N = x.size();
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    std::vector<cld> w(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long double a = -two_pi * static_cast<long double>(k) / static_cast<long double>(N);
        w[k] = cld(std::cos(a), std::sin(a));
    }
    std::vector<cd> out(N);
    for (std::size_t j = 0; j < N; ++j) {
        cld acc{0.0L, 0.0L};
        std::size_t k = 0;
        for (std::size_t l = 0; l < N; ++l) {
            acc += cld(x[l].real(), x[l].imag()) * w[k];
            k += j;
            if (k >= N) k -= N;
        }
        out[j] = cd(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }
    return out;
}

inline double max_abs_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const std::vector<cd>& a) {
    double m = 0.0;
    for (const auto& v : a) m = std::max(m, std::abs(v));
    return m;
}

inline std::vector<cd> random_complex(std::size_t N, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cd> x(N);
    for (auto& v : x) {
        const double re = g(rng);
        v = {re, g(rng)};
    }
    return x;
}

/// exp(2 pi i k / N) with k reduced mod N first.
inline cd unit_root(long long k, long long N) {
    const long long r = ((k % N) + N) % N;
    const long double a = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(r) / static_cast<long double>(N);
    return {static_cast<double>(std::cos(a)), static_cast<double>(std::sin(a))};
}

/// On-grid multitone: x_l = sum_k amps[k] exp(2 pi i bins[k] l / N).
inline hfp::ComplexSignal on_grid(std::size_t N, const std::vector<std::size_t>& bins, const std::vector<cd>& amps, double rate) {
    hfp::ComplexSignal x{std::vector<cd>(N), rate, 0};
    for (std::size_t l = 0; l < N; ++l) {
        for (std::size_t k = 0; k < bins.size(); ++k) {
            x.samples[l] += amps[k] * unit_root(static_cast<long long>(bins[k] * l), static_cast<long long>(N));
        }
    }
    return x;
}

} // namespace oracle
