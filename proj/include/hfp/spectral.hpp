#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hfp/dft.hpp"
#include "hfp/error.hpp"
#include "hfp/parallel.hpp"

namespace hfp {

using cd = std::complex<double>;

/// Uniformly sampled complex series. origin_index locates sample 0 on the
/// underlying grid (streams carry their shift here).
struct ComplexSignal {
    std::vector<cd> samples;
    double rate_hz = 1.0;
    std::size_t origin_index = 0;

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] const cd& operator[](std::size_t i) const noexcept { return samples[i]; }
};

struct Spectrum {
    std::vector<cd> bins;
    double bin_hz = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return bins.size(); }
};

/// Stride u, shift s, M shifted streams of n samples each. n == 0 asks for
/// the longest stream that fits in the source record.
struct StreamSpec {
    std::size_t u = 1;
    std::size_t s = 1;
    std::size_t M = 1;
    std::size_t n = 0;
};

struct StreamSet {
    StreamSpec spec;
    std::vector<ComplexSignal> streams;
    std::vector<Spectrum> spectra; // filled by compute_spectra()

    [[nodiscard]] std::size_t samples_used() const noexcept {
        std::size_t total = 0;
        for (const auto& s : streams) total += s.size();
        return total;
    }
};

struct Peak {
    std::size_t bin = 0;
    double magnitude = 0.0;

    friend bool operator==(const Peak&, const Peak&) = default;
};

struct PeakList {
    std::vector<Peak> entries;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries.empty(); }
};

template <typename S>
concept SampleSource = requires(const S& src, std::size_t i) {
    { src.size() } -> std::convertible_to<std::size_t>;
    { src[i] } -> std::convertible_to<cd>;
};

inline Spectrum dft(const ComplexSignal& x) {
    if (x.samples.empty()) throw Error(ErrorCode::BadShape, "dft of an empty signal");
    const detail::FourierPlan plan(x.size());
    Spectrum out{std::vector<cd>(x.size()), x.rate_hz / static_cast<double>(x.size())};
    plan.forward(x.samples, out.bins);
    return out;
}

inline ComplexSignal idft(const Spectrum& X) {
    if (X.bins.empty()) throw Error(ErrorCode::BadShape, "idft of an empty spectrum");
    const std::size_t N = X.size();
    std::vector<cd> conj_bins(N);
    std::transform(X.bins.begin(), X.bins.end(), conj_bins.begin(), [](cd v) { return std::conj(v); });
    ComplexSignal x{std::vector<cd>(N), X.bin_hz * static_cast<double>(N), 0};
    detail::FourierPlan(N).forward(conj_bins, x.samples);
    const double scale = 1.0 / static_cast<double>(N);
    for (auto& v : x.samples) v = std::conj(v) * scale;
    return x;
}

/// Periodic shift: result[l] = x[(l + s) mod L].
inline ComplexSignal shift(const ComplexSignal& x, std::size_t s) {
    const std::size_t L = x.size();
    ComplexSignal out{std::vector<cd>(L), x.rate_hz, x.origin_index + s};
    for (std::size_t l = 0; l < L; ++l) out.samples[l] = x.samples[(l + s) % L];
    return out;
}

/// Longest per-stream length that needs no sample past L-1.
inline std::size_t max_stream_length(std::size_t L, std::size_t u, std::size_t s, std::size_t M) noexcept {
    const std::size_t lead = (M - 1) * s;
    if (u == 0 || M == 0 || L == 0 || lead > L - 1) return 0;
    return (L - 1 - lead) / u + 1;
}

/// Sample-budget formula floor((L - (s-1) M) / u) used by the reference
/// experiments; 0 when the formula goes non-positive.
inline std::size_t budget_stream_length(std::size_t L, std::size_t u, std::size_t s, std::size_t M) noexcept {
    const auto num = static_cast<long long>(L) - (static_cast<long long>(s) - 1) * static_cast<long long>(M);
    if (u == 0 || num <= 0) return 0;
    return static_cast<std::size_t>(num) / u;
}

namespace detail {

inline void check_stream_spec(const StreamSpec& spec) {
    if (spec.u == 0 || spec.s == 0 || spec.M == 0) throw Error(ErrorCode::ConfigError, "u, s and M must be positive");
    if (std::gcd(spec.u, spec.s) != 1) {
        throw Error(ErrorCode::NotCoprime, "u=" + std::to_string(spec.u) + " and s=" + std::to_string(spec.s) + " must be coprime");
    }
}

} // namespace detail

/// Resolves n for a source of length L. Non-wrapped streams must stay inside
/// the record; wrapped streams index modulo L and default to floor(L/u).
inline StreamSpec resolve_stream_spec(StreamSpec spec, std::size_t L, bool wrap) {
    detail::check_stream_spec(spec);
    if (wrap) {
        if (spec.n == 0) spec.n = L / spec.u;
        if (spec.n == 0) throw Error(ErrorCode::IndexBudgetExceeded, "record shorter than one stride");
        return spec;
    }
    const std::size_t feasible = max_stream_length(L, spec.u, spec.s, spec.M);
    if (spec.n == 0) spec.n = feasible;
    if (spec.n == 0 || spec.n > feasible) {
        throw Error(ErrorCode::IndexBudgetExceeded, "u=" + std::to_string(spec.u) + " s=" + std::to_string(spec.s) + " M=" +
                                                        std::to_string(spec.M) + " n=" + std::to_string(spec.n) +
                                                        " needs samples beyond index " + std::to_string(L - 1));
    }
    return spec;
}

/// Stream m of an already resolved spec: source[u*l + m*s], l = 0..n-1.
template <SampleSource Source>
ComplexSignal extract_stream(const Source& source, double rate_hz, const StreamSpec& spec, std::size_t m, bool wrap = false,
                             std::size_t origin = 0) {
    const std::size_t L = source.size();
    ComplexSignal stream{std::vector<cd>(spec.n), rate_hz / static_cast<double>(spec.u), origin + m * spec.s};
    for (std::size_t l = 0; l < spec.n; ++l) {
        std::size_t idx = spec.u * l + m * spec.s;
        if (wrap) {
            idx %= L;
        } else if (idx >= L) {
            throw Error(ErrorCode::IndexBudgetExceeded, "stream sample index " + std::to_string(idx) + " beyond record");
        }
        stream.samples[l] = source[idx];
    }
    return stream;
}

template <SampleSource Source>
StreamSet extract_streams(const Source& source, double rate_hz, StreamSpec spec, bool wrap = false, std::size_t origin = 0) {
    spec = resolve_stream_spec(spec, source.size(), wrap);
    StreamSet set{spec, {}, {}};
    set.streams.reserve(spec.M);
    for (std::size_t m = 0; m < spec.M; ++m) set.streams.push_back(extract_stream(source, rate_hz, spec, m, wrap, origin));
    return set;
}

inline StreamSet extract_streams(const ComplexSignal& x, StreamSpec spec, bool wrap = false) {
    return extract_streams(x.samples, x.rate_hz, spec, wrap, x.origin_index);
}

/// Bins with |X_j| >= T, descending magnitude, ties by ascending bin.
inline PeakList select_peaks(const Spectrum& X, double T) {
    if (!(T >= 0.0)) throw Error(ErrorCode::ConfigError, "threshold must be non-negative");
    PeakList peaks;
    for (std::size_t j = 0; j < X.size(); ++j) {
        const double mag = std::abs(X.bins[j]);
        if (mag >= T) peaks.entries.push_back({j, mag});
    }
    std::sort(peaks.entries.begin(), peaks.entries.end(), [](const Peak& a, const Peak& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return a.bin < b.bin;
    });
    return peaks;
}

/// Short DFT of every stream; streams are independent and may run in parallel.
inline void compute_spectra(StreamSet& set, std::size_t threads = 1) {
    set.spectra.assign(set.streams.size(), Spectrum{});
    parallel_for(set.streams.size(), threads, [&](std::size_t m) { set.spectra[m] = dft(set.streams[m]); });
}

} // namespace hfp
