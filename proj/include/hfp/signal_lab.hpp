#pragma once

// Multitone synthesis with calibrated circular Gaussian noise, and scoring of a
// recovered spectrum against the true tone list.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hfp/config.hpp"
#include "hfp/error.hpp"
#include "hfp/pipeline.hpp"
#include "hfp/spectral.hpp"

namespace hfp {

struct ToneSpec {
    double mu_hz = 0.0;
    std::complex<double> amplitude{1.0, 0.0};
};

struct SynthSpec {
    std::vector<ToneSpec> tones;
    double rate_hz = 1.0;
    std::size_t length = 1;
    std::optional<double> snr_db;
    std::uint64_t seed = 0;

    void validate() const {
        if (length == 0) throw Error(ErrorCode::ConfigError, "length must be >= 1");
        if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorCode::ConfigError, "rate_hz must be positive");
        if (snr_db && !std::isfinite(*snr_db)) throw Error(ErrorCode::ConfigError, "snr_db must be finite");
        for (const auto& t : tones) {
            if (!std::isfinite(t.mu_hz) || !std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag())) {
                throw Error(ErrorCode::ConfigError, "tone values must be finite");
            }
        }
    }
};

/// Keys: rate_hz, length, snr_db (omit or "none" for noise-free), seed, and
/// repeated "tone = mu,re,im".
inline SynthSpec parse_synth_spec(const std::vector<KeyValue>& kvs) {
    SynthSpec spec;
    for (const auto& kv : kvs) {
        const std::string ctx = detail::where(kv);
        if (kv.key == "rate_hz") {
            spec.rate_hz = parse_double(kv.value, ctx);
        } else if (kv.key == "length") {
            spec.length = parse_size(kv.value, ctx);
        } else if (kv.key == "snr_db") {
            if (kv.value == "none") spec.snr_db.reset();
            else spec.snr_db = parse_double(kv.value, ctx);
        } else if (kv.key == "seed") {
            spec.seed = parse_size(kv.value, ctx);
        } else if (kv.key == "tone") {
            const std::string_view v = kv.value;
            const auto c1 = v.find(',');
            const auto c2 = c1 == std::string_view::npos ? c1 : v.find(',', c1 + 1);
            if (c2 == std::string_view::npos) throw Error(ErrorCode::ParseError, ctx + "tone needs mu,re,im");
            spec.tones.push_back({parse_double(v.substr(0, c1), ctx),
                                  {parse_double(v.substr(c1 + 1, c2 - c1 - 1), ctx), parse_double(v.substr(c2 + 1), ctx)}});
        } else {
            throw Error(ErrorCode::ParseError, ctx + "unknown synth key");
        }
    }
    spec.validate();
    return spec;
}

inline ComplexSignal synthesize_clean(const SynthSpec& spec) {
    spec.validate();
    ComplexSignal x{std::vector<cd>(spec.length), spec.rate_hz, 0};
    for (const auto& tone : spec.tones) {
        // reduce the phase in long double; l * mu / R grows past 1e4 turns
        const long double step = static_cast<long double>(tone.mu_hz) / static_cast<long double>(spec.rate_hz);
        for (std::size_t l = 0; l < spec.length; ++l) {
            long double turns = step * static_cast<long double>(l);
            turns -= std::floor(turns);
            x.samples[l] += tone.amplitude * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(turns));
        }
    }
    return x;
}

inline double mean_power(const std::vector<cd>& v) {
    if (v.empty()) return 0.0;
    double p = 0.0;
    for (const auto& z : v) p += std::norm(z);
    return p / static_cast<double>(v.size());
}

/// Noise variance giving the requested SNR in dB against the clean mean power.
inline double noise_variance(double clean_power, double snr_db) { return clean_power / std::pow(10.0, snr_db / 10.0); }

inline ComplexSignal synthesize(const SynthSpec& spec) {
    ComplexSignal x = synthesize_clean(spec);
    if (!spec.snr_db) return x;
    const double var = noise_variance(mean_power(x.samples), *spec.snr_db);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    for (auto& v : x.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cd{re, im};
    }
    return x;
}

struct MatchedTone {
    ToneSpec truth;
    RecoveredComponent recovered;
    double freq_error_hz = 0.0;
    double amplitude_error = 0.0; // |alpha - amplitude / N|
};

struct EvalReport {
    std::vector<MatchedTone> matched;
    std::vector<ToneSpec> missed;
    std::vector<RecoveredComponent> spurious;
    double precision = 0.0;
    double recall = 0.0;
};

/// Greedy nearest matching: closest (tone, component) pair first, each used
/// at most once. Components are compared in per-sample amplitude units.
inline EvalReport evaluate(const SynthSpec& truth, const SparseSpectrum& result, double tol_hz) {
    if (!(tol_hz > 0.0)) throw Error(ErrorCode::ConfigError, "evaluation tolerance must be positive");
    const double N = static_cast<double>(result.full_length == 0 ? truth.length : result.full_length);
    const double R = truth.rate_hz;
    struct Pair {
        double dist;
        std::size_t tone;
        std::size_t comp;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < truth.tones.size(); ++i) {
        for (std::size_t k = 0; k < result.components.size(); ++k) {
            const double d = circular_distance(detail::wrap_hz(truth.tones[i].mu_hz, R), result.components[k].freq_hz, R);
            if (d <= tol_hz) pairs.push_back({d, i, k});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.tone != b.tone) return a.tone < b.tone;
        return a.comp < b.comp;
    });
    std::vector<bool> tone_used(truth.tones.size(), false), comp_used(result.components.size(), false);
    EvalReport rep;
    for (const auto& p : pairs) {
        if (tone_used[p.tone] || comp_used[p.comp]) continue;
        tone_used[p.tone] = comp_used[p.comp] = true;
        const auto& c = result.components[p.comp];
        rep.matched.push_back({truth.tones[p.tone], c, p.dist, std::abs(truth.tones[p.tone].amplitude - c.amplitude / N)});
    }
    std::sort(rep.matched.begin(), rep.matched.end(), [](const MatchedTone& a, const MatchedTone& b) { return a.truth.mu_hz < b.truth.mu_hz; });
    for (std::size_t i = 0; i < truth.tones.size(); ++i) {
        if (!tone_used[i]) rep.missed.push_back(truth.tones[i]);
    }
    for (std::size_t k = 0; k < result.components.size(); ++k) {
        if (!comp_used[k]) rep.spurious.push_back(result.components[k]);
    }
    const double found = static_cast<double>(rep.matched.size());
    rep.recall = truth.tones.empty() ? 1.0 : found / static_cast<double>(truth.tones.size());
    rep.precision = result.components.empty() ? (truth.tones.empty() ? 1.0 : 0.0) : found / static_cast<double>(result.components.size());
    return rep;
}

} // namespace hfp
