#pragma once

// Noise-free oracle equivalence on small periodic instances: the hybrid
// analysis must reproduce the dense DFT support and coefficients.

#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hfp/pipeline.hpp"
#include "hfp/spectral.hpp"

namespace hfp {

struct SelftestOptions {
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    double tolerance = 1e-6;
    std::size_t threads = 1;
};

struct SelftestReport {
    std::size_t trials = 0;
    std::size_t passed = 0;
    std::size_t collisions = 0; // trials with two or more tones on one short bin
    std::vector<std::string> failures;
    [[nodiscard]] bool ok() const noexcept { return passed == trials; }
};

struct SelftestCase {
    ComplexSignal x;
    HybridConfig cfg;
    std::vector<std::size_t> bins;
};

/// N <= 240 with u | N, u in {4, 5, 6}, s coprime to u, M = 9, K <= 3 on-grid
/// tones with |amplitude| in [0.5, 1.5]. Wrapped streams keep the model exact.
inline SelftestCase make_selftest_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick_u(4, 6);
    const std::size_t u = pick_u(rng);
    std::uniform_int_distribution<std::size_t> pick_n(2, 240 / u);
    const std::size_t n = pick_n(rng);
    const std::size_t N = n * u;
    std::vector<std::size_t> coprime;
    for (std::size_t s = 1; s < std::min<std::size_t>(N, 40); ++s) {
        if (std::gcd(s, u) == 1) coprime.push_back(s);
    }
    const std::size_t s = coprime[std::uniform_int_distribution<std::size_t>(0, coprime.size() - 1)(rng)];
    const std::size_t K = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, N))(rng);

    std::set<std::size_t> chosen;
    std::uniform_int_distribution<std::size_t> pick_bin(0, N - 1);
    while (chosen.size() < K) chosen.insert(pick_bin(rng));

    std::uniform_real_distribution<double> modulus(0.5, 1.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    Spectrum X{std::vector<cd>(N), 1.0};
    for (std::size_t j : chosen) {
        const double a = modulus(rng);
        X.bins[j] = std::polar(a * static_cast<double>(N), phase(rng));
    }
    SelftestCase c{idft(X), {}, {chosen.begin(), chosen.end()}};
    c.x.rate_hz = static_cast<double>(N); // 1 Hz bins
    c.cfg.u = u;
    c.cfg.s = s;
    c.cfg.M = 9;
    c.cfg.wrap = true;
    c.cfg.threshold = 0.1;
    c.cfg.prony.sigma_rel_tol = 1e-8;
    c.cfg.prony.noise_gate = 0.0;
    return c;
}

inline SelftestReport run_selftest(const SelftestOptions& opts = {}) {
    std::mt19937_64 rng(opts.seed);
    SelftestReport rep;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        SelftestCase c = make_selftest_case(rng);
        c.cfg.threads = opts.threads;
        ++rep.trials;
        const std::size_t n = c.x.size() / c.cfg.u;
        std::set<std::size_t> residues;
        for (std::size_t j : c.bins) residues.insert(j % n);
        if (residues.size() < c.bins.size()) ++rep.collisions;

        std::string why;
        try {
            const SparseSpectrum dense = dense_reference(c.x, c.cfg.threshold);
            const SparseSpectrum got = analyze(c.x, c.cfg);
            if (got.components.size() != dense.components.size()) {
                why = std::to_string(got.components.size()) + " components, dense has " + std::to_string(dense.components.size());
            } else {
                for (const auto& d : dense.components) {
                    const RecoveredComponent* hit = nullptr;
                    for (const auto& g : got.components) {
                        if (circular_distance(g.freq_hz, d.freq_hz, c.x.rate_hz) <= opts.tolerance) hit = &g;
                    }
                    if (hit == nullptr) {
                        why = "missing " + std::to_string(d.freq_hz) + " Hz";
                        break;
                    }
                    if (std::abs(hit->amplitude - d.amplitude) > opts.tolerance * std::abs(d.amplitude)) {
                        why = "amplitude off at " + std::to_string(d.freq_hz) + " Hz";
                        break;
                    }
                }
            }
        } catch (const Error& e) {
            why = e.what();
        }
        if (why.empty()) {
            ++rep.passed;
        } else {
            rep.failures.push_back("trial " + std::to_string(t) + " (N=" + std::to_string(c.x.size()) + " u=" + std::to_string(c.cfg.u) +
                                   " s=" + std::to_string(c.cfg.s) + "): " + why);
        }
    }
    return rep;
}

} // namespace hfp
