#pragma once

// Alias resolution from two coprime steps. A tone f observed over a step of
// d grid samples shows up as the generator exp(2 pi i f d / R); its d-th roots
// give the d frequencies in [0, R) consistent with it. Two candidate sets of
// coprime multiplicity share exactly one frequency.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hfp/error.hpp"

namespace hfp {

struct Generator {
    std::complex<double> value{1.0, 0.0};
    std::size_t step = 1;

    static Generator from_frequency(double freq_hz, std::size_t step, double rate_hz) {
        const double turns = freq_hz * static_cast<double>(step) / rate_hz;
        return {std::polar(1.0, 2.0 * std::numbers::pi * (turns - std::floor(turns))), step};
    }

    [[nodiscard]] std::complex<double> normalized() const { return value / std::abs(value); }

    /// arg(value) as a fraction of a turn, in [0, 1).
    [[nodiscard]] double turns() const noexcept {
        double t = std::atan2(value.imag(), value.real()) / (2.0 * std::numbers::pi);
        if (t < 0.0) t += 1.0;
        if (t >= 1.0) t = 0.0;
        return t;
    }

    [[nodiscard]] bool near_unit(double unit_tol = 0.2) const noexcept { return std::abs(std::abs(value) - 1.0) <= unit_tol; }
};

struct CandidateSet {
    Generator generator;
    std::size_t multiplicity = 1;
    double rate_hz = 1.0;
    std::vector<double> candidates; // ascending, in [0, rate_hz)
};

struct BezoutPair {
    long long t = 0;
    long long v = 0;
    std::size_t u = 1;
    std::size_t s = 1;

    [[nodiscard]] long long amplification() const noexcept { return std::llabs(t) + std::llabs(v); }
};

inline constexpr double kDegenerateModulus = 1e-12;

namespace detail {

inline void check_generator(const Generator& g) {
    if (g.step == 0) throw Error(ErrorCode::BadShape, "generator step must be positive");
    if (!(std::abs(g.value) >= kDegenerateModulus)) throw Error(ErrorCode::DegenerateGenerator, "generator modulus below 1e-12");
}

inline double wrap_hz(double f, double rate_hz) noexcept {
    double w = std::fmod(f, rate_hz);
    if (w < 0.0) w += rate_hz;
    if (w >= rate_hz) w = 0.0;
    return w;
}

/// Signed offset b - a folded into [-R/2, R/2).
inline double circular_offset(double a, double b, double rate_hz) noexcept {
    double d = std::fmod(b - a, rate_hz);
    if (d >= 0.5 * rate_hz) d -= rate_hz;
    if (d < -0.5 * rate_hz) d += rate_hz;
    return d;
}

} // namespace detail

inline double circular_distance(double a, double b, double rate_hz) noexcept {
    return std::abs(detail::circular_offset(a, b, rate_hz));
}

inline CandidateSet candidate_set(const Generator& g, double rate_hz) {
    detail::check_generator(g);
    if (!(rate_hz > 0.0)) throw Error(ErrorCode::ConfigError, "rate must be positive");
    const double base = g.turns();
    const double d = static_cast<double>(g.step);
    CandidateSet set{g, g.step, rate_hz, std::vector<double>(g.step)};
    for (std::size_t k = 0; k < g.step; ++k) set.candidates[k] = (base + static_cast<double>(k)) * rate_hz / d;
    return set;
}

/// Integers with u t + s v = 1, smallest max(|t|, |v|), then smallest |t|.
inline BezoutPair bezout(std::size_t u, std::size_t s) {
    if (u == 0 || s == 0) throw Error(ErrorCode::ConfigError, "bezout needs positive u and s");
    if (std::gcd(u, s) != 1) throw Error(ErrorCode::NotCoprime, "gcd(" + std::to_string(u) + ", " + std::to_string(s) + ") != 1");

    // extended Euclid
    long long r0 = static_cast<long long>(u), r1 = static_cast<long long>(s);
    long long t0 = 1, t1 = 0, v0 = 0, v1 = 1;
    while (r1 != 0) {
        const long long q = r0 / r1;
        r0 = std::exchange(r1, r0 - q * r1);
        t0 = std::exchange(t1, t0 - q * t1);
        v0 = std::exchange(v1, v0 - q * v1);
    }
    // all solutions: t = t0 + s k, v = v0 - u k
    const auto sl = static_cast<long long>(s), ul = static_cast<long long>(u);
    const double k_t = -static_cast<double>(t0) / static_cast<double>(sl);
    const double k_v = static_cast<double>(v0) / static_cast<double>(ul);
    const auto k_lo = static_cast<long long>(std::floor(std::min(k_t, k_v))) - 1;
    const auto k_hi = static_cast<long long>(std::ceil(std::max(k_t, k_v))) + 1;

    BezoutPair best{t0, v0, u, s};
    auto key = [](const BezoutPair& p) { return std::pair{std::max(std::llabs(p.t), std::llabs(p.v)), std::llabs(p.t)}; };
    for (long long k = k_lo; k <= k_hi; ++k) {
        const BezoutPair cand{t0 + sl * k, v0 - ul * k, u, s};
        if (key(cand) < key(best)) best = cand;
    }
    return best;
}

struct BezoutResolution {
    double freq_hz = 0.0;
    long long noise_amplification = 0; // |t| + |v|
};

/// arg(g_u^t g_s^v) / 2 pi * R, folded into [0, R).
inline BezoutResolution resolve_bezout(const Generator& g_u, const Generator& g_s, const BezoutPair& bp, double rate_hz) {
    detail::check_generator(g_u);
    detail::check_generator(g_s);
    if (g_u.step != bp.u || g_s.step != bp.s) throw Error(ErrorCode::BadShape, "generator steps do not match the Bezout pair");
    const double turns = static_cast<double>(bp.t) * g_u.turns() + static_cast<double>(bp.v) * g_s.turns();
    return {detail::wrap_hz((turns - std::floor(turns)) * rate_hz, rate_hz), bp.amplification()};
}

/// Worst-case frequency error of resolve_bezout when the generator angles are
/// off by at most eps_u and eps_s radians.
inline double bezout_error_bound(const BezoutPair& bp, double eps_u, double eps_s, double rate_hz) noexcept {
    return (static_cast<double>(std::llabs(bp.t)) * eps_u + static_cast<double>(std::llabs(bp.v)) * eps_s) * rate_hz /
           (2.0 * std::numbers::pi);
}

struct MatchOptions {
    double tol_hz = -1.0; // < 0: half the U spacing, R / (2u)
    double ambiguity_factor = 2.0;
    double s_weight = 1.0; // 1 returns the S candidate itself
};

struct MatchResult {
    double freq_hz = 0.0;
    double match_distance_hz = 0.0;
    double runner_up_distance_hz = std::numeric_limits<double>::infinity();
    double u_candidate_hz = 0.0;
    double s_candidate_hz = 0.0;
};

/// Closest (U, S) pair by circular distance over the full distance matrix.
inline MatchResult resolve_match(const CandidateSet& U, const CandidateSet& S, const MatchOptions& opts = {}) {
    if (std::gcd(U.multiplicity, S.multiplicity) != 1) {
        throw Error(ErrorCode::NotCoprime, "candidate multiplicities " + std::to_string(U.multiplicity) + " and " +
                                               std::to_string(S.multiplicity) + " are not coprime");
    }
    if (U.rate_hz != S.rate_hz) throw Error(ErrorCode::BadShape, "candidate sets use different rates");
    const double R = U.rate_hz;
    const double tol = opts.tol_hz >= 0.0 ? opts.tol_hz : R / (2.0 * static_cast<double>(U.multiplicity));

    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < U.candidates.size(); ++i) {
        for (std::size_t j = 0; j < S.candidates.size(); ++j) {
            const double d = circular_distance(U.candidates[i], S.candidates[j], R);
            if (d < best) {
                second = best;
                best = d;
                bi = i;
                bj = j;
            } else if (d < second) {
                second = d;
            }
        }
    }
    if (best > tol) {
        throw Error(ErrorCode::NoIntersection, "closest candidates are " + std::to_string(best) + " Hz apart (tol " + std::to_string(tol) + ")");
    }
    if (second <= opts.ambiguity_factor * best) {
        throw Error(ErrorCode::NoUniqueIntersection,
                    "best match " + std::to_string(best) + " Hz, runner-up " + std::to_string(second) + " Hz");
    }
    const double fu = U.candidates[bi];
    const double fs = S.candidates[bj];
    MatchResult out;
    out.freq_hz = opts.s_weight == 1.0 ? fs : detail::wrap_hz(fu + opts.s_weight * detail::circular_offset(fu, fs, R), R);
    out.match_distance_hz = best;
    out.runner_up_distance_hz = second;
    out.u_candidate_hz = fu;
    out.s_candidate_hz = fs;
    return out;
}

} // namespace hfp
