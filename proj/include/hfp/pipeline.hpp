#pragma once

// Hybrid Fourier-Prony analysis. The signal is read as M streams of stride u,
// each shifted by s grid samples from the previous one. Every peak bin of the
// short stream DFTs yields a sequence P(m) across the streams; its exponential
// terms carry the step-s generators, the bin itself the step-u generator, and
// intersecting the two alias sets places each component on the full grid.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hfp/alias.hpp"
#include "hfp/error.hpp"
#include "hfp/linalg.hpp"
#include "hfp/parallel.hpp"
#include "hfp/prony.hpp"
#include "hfp/spectral.hpp"

namespace hfp {

enum class Resolver { Match, Bezout };

/// How the per-stream length n is chosen when not given explicitly.
enum class LengthPolicy {
    MaxFeasible, // longest n that needs no sample past the record
    Budget,      // floor((L - (s-1) M) / u), capped at MaxFeasible
};

struct PronyConfig {
    double sigma_rel_tol = 1e-3;
    std::size_t extra_terms = 0;
    double delta = 0.2;        // keep terms with | |z| - 1 | <= delta
    std::size_t M_rows = 0;    // pencil rows, 0: ceil(M/2)
    double noise_gate = 2.0;   // 0 disables the noise-floor rank gate
};

struct HybridConfig {
    std::size_t u = 1;
    std::size_t s = 1;
    std::size_t M = 1;
    std::size_t n = 0; // 0: chosen by length_policy
    LengthPolicy length_policy = LengthPolicy::MaxFeasible;
    double threshold = 0.0; // per-sample amplitude units, |X_j| / transform length
    Resolver resolver = Resolver::Match;
    PronyConfig prony;
    bool wrap = false;
    bool shortcut_shifted = false;
    bool refine_bins = true; // locate each term inside its bin from the neighbour bins
    double merge_tol_hz = -1.0; // < 0: R / (2 n u)
    double match_tol_hz = -1.0; // < 0: R / (2 u)
    double ambiguity_factor = 2.0;
    std::size_t threads = 1; // 0: hardware concurrency

    void validate() const {
        if (u == 0 || s == 0 || M == 0) throw Error(ErrorCode::ConfigError, "u, s and M must be positive");
        if (std::gcd(u, s) != 1) {
            throw Error(ErrorCode::NotCoprime, "u=" + std::to_string(u) + " and s=" + std::to_string(s) + " must be coprime (gcd(u, s) == 1)");
        }
        if (!(threshold >= 0.0)) throw Error(ErrorCode::ConfigError, "threshold must be non-negative");
        if (M == 1 && u > 1) throw Error(ErrorCode::ConfigError, "M >= 2 shifted streams are needed to undo aliasing when u > 1");
        if (!(prony.delta > 0.0)) throw Error(ErrorCode::ConfigError, "delta must be positive");
        if (!(prony.sigma_rel_tol >= 0.0)) throw Error(ErrorCode::ConfigError, "sigma_rel_tol must be non-negative");
        if (!(prony.noise_gate >= 0.0)) throw Error(ErrorCode::ConfigError, "noise_gate must be non-negative");
        if (!(ambiguity_factor >= 1.0)) throw Error(ErrorCode::ConfigError, "ambiguity_factor must be >= 1");
    }

    /// Stream layout for a record of L samples, n resolved.
    [[nodiscard]] StreamSpec stream_spec(std::size_t L) const {
        StreamSpec spec{u, s, M, n};
        if (spec.n == 0 && !wrap && length_policy == LengthPolicy::Budget) {
            const std::size_t budget = budget_stream_length(L, u, s, M);
            const std::size_t feasible = max_stream_length(L, u, s, M);
            spec.n = budget > 0 ? std::min(budget, feasible) : feasible;
        }
        return resolve_stream_spec(spec, L, wrap);
    }
};

struct RecoveredComponent {
    double freq_hz = 0.0;
    std::complex<double> amplitude; // full-spectrum coefficient scale
    std::size_t source_bin = 0;
    double bin_offset = 0.0; // estimated tone position relative to the bin centre, in bins
    std::size_t collision_order = 1;
    double match_distance_hz = 0.0;
    double residual = 0.0;
};

struct BinDiagnostics {
    std::size_t bin = 0;
    PronySequence sequence;
    OrderEstimate order;
    std::size_t fit_order = 0;
    double residual = 0.0;
    std::vector<ExponentialTerm> terms;
    std::vector<std::string> notes;
};

struct Diagnostics {
    std::size_t stream_length = 0;
    std::size_t max_feasible_length = 0;
    std::size_t budget_formula_length = 0;
    std::vector<std::size_t> stream_sample_counts;
    std::size_t samples_used = 0;
    double effective_resolution_hz = 0.0;
    double noise_sigma = 0.0; // per-bin noise estimate of the short DFTs
    std::size_t shortcut_fallbacks = 0;
    std::vector<BinDiagnostics> bins; // ascending bin index
    std::vector<std::string> unresolved;      // terms that failed alias resolution
    std::vector<std::string> leakage_dropped; // terms explained by a stronger bin, or below threshold
};

struct SparseSpectrum {
    std::vector<RecoveredComponent> components; // descending |amplitude|, then ascending freq
    HybridConfig config;
    double rate_hz = 1.0;
    std::size_t full_length = 0;
    Diagnostics diagnostics;
};

/// values[m] = (DFT of stream m)[bin] for every peak bin.
inline std::map<std::size_t, PronySequence> build_prony_sequences(const StreamSet& streams, const PeakList& peaks) {
    if (streams.spectra.size() != streams.streams.size()) throw Error(ErrorCode::BadShape, "stream spectra not computed");
    const std::size_t n = streams.spectra.empty() ? 0 : streams.spectra.front().size();
    for (const auto& sp : streams.spectra) {
        if (sp.size() != n) throw Error(ErrorCode::BadShape, "stream DFTs differ in length");
    }
    std::map<std::size_t, PronySequence> out;
    for (const Peak& p : peaks.entries) {
        if (p.bin >= n) throw Error(ErrorCode::BadShape, "peak bin outside the stream DFT");
        PronySequence seq{std::vector<std::complex<double>>(streams.spectra.size()), streams.spec.s};
        for (std::size_t m = 0; m < streams.spectra.size(); ++m) seq.values[m] = streams.spectra[m].bins[p.bin];
        out.emplace(p.bin, std::move(seq));
    }
    return out;
}

/// K x K matrix V(l, k) = z_k^l.
inline Matrix vandermonde(const std::vector<std::complex<double>>& nodes) {
    const auto K = static_cast<Eigen::Index>(nodes.size());
    Matrix V(K, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        std::complex<double> power{1.0, 0.0};
        for (Eigen::Index l = 0; l < K; ++l) {
            V(l, k) = power;
            power *= nodes[static_cast<std::size_t>(k)];
        }
    }
    return V;
}

inline double vandermonde_condition(const std::vector<std::complex<double>>& nodes) {
    if (nodes.empty()) throw Error(ErrorCode::BadShape, "no Vandermonde nodes");
    return svd_small(vandermonde(nodes)).condition();
}

struct ShortcutResult {
    std::vector<std::complex<double>> values; // stream-m DFT at each peak bin, peak order
    double condition = 1.0;
};

inline constexpr double kMaxVandermondeCondition = 1e10;

/// Stream-m DFT values at the peak bins from only K = |peaks| samples of the
/// stream, assuming the stream spectrum is supported on those bins. Nodes are
/// the short-grid exponentials exp(2 pi i j / n) of the peak bins.
template <SampleSource Source>
ShortcutResult shifted_coeffs_shortcut(const Source& source, const PeakList& peaks, const StreamSpec& spec, std::size_t m,
                                       bool wrap = false) {
    const std::size_t K = peaks.size();
    if (K == 0) return {};
    if (m < 1) throw Error(ErrorCode::BadShape, "shortcut is for shifted streams, m >= 1");
    if (spec.n == 0 || K > spec.n) throw Error(ErrorCode::BadShape, "more peaks than stream samples");
    std::vector<std::complex<double>> nodes(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double turns = static_cast<double>(peaks.entries[k].bin) / static_cast<double>(spec.n);
        nodes[k] = std::polar(1.0, 2.0 * std::numbers::pi * turns);
    }
    const SvdResult svd = svd_small(vandermonde(nodes));
    ShortcutResult out;
    out.condition = svd.condition();
    if (!(out.condition <= kMaxVandermondeCondition)) {
        throw Error(ErrorCode::IllConditionedVandermonde, "Vandermonde condition " + std::to_string(out.condition));
    }
    const std::size_t L = source.size();
    Vector rhs(static_cast<Eigen::Index>(K));
    for (std::size_t l = 0; l < K; ++l) {
        std::size_t idx = spec.u * l + m * spec.s;
        if (wrap) {
            idx %= L;
        } else if (idx >= L) {
            throw Error(ErrorCode::IndexBudgetExceeded, "shortcut sample index beyond record");
        }
        rhs(static_cast<Eigen::Index>(l)) = source[idx];
    }
    const Vector y = solve_least_squares(svd, rhs, 0.0);
    out.values.resize(K);
    for (std::size_t k = 0; k < K; ++k) out.values[k] = y(static_cast<Eigen::Index>(k)) * static_cast<double>(spec.n);
    return out;
}

namespace detail {

struct TermOutcome {
    ExponentialTerm term;
    RecoveredComponent component; // valid when error is empty
    std::string error;
};

struct BinFit {
    BinDiagnostics diag;
    std::vector<ExponentialTerm> kept; // unit-circle terms, strongest first, at most `order`
    std::size_t order = 1;
};

struct BinContext {
    const HybridConfig& cfg;
    double rate_hz;
    std::size_t full_length;
    std::size_t n;
    double noise_sigma;
    const std::vector<Spectrum>* spectra; // all M stream DFTs, or null
};

/// Offset delta of a tone from the centre of its bin, given its amplitude at
/// home and in the neighbour on `side` (+1 or -1). Inverts the ratio
/// D(delta - side) / D(delta) of the short-DFT kernel; 0 when the ratio is
/// not usable.
inline double offset_from_neighbor(std::complex<double> home, std::complex<double> neighbor, int side, std::size_t n) {
    if (n < 2 || std::abs(home) == 0.0) return 0.0;
    const double b = std::numbers::pi / static_cast<double>(n);
    const auto turn = std::polar(1.0, static_cast<double>(side) * b * static_cast<double>(n - 1));
    const double rho = (-(neighbor / home) * turn).real();
    const double den = 1.0 - rho * std::cos(b);
    if (std::abs(den) < 1e-12) return 0.0;
    const double delta = -static_cast<double>(side) * std::atan(rho * std::sin(b) / den) / b;
    return std::clamp(delta, -1.0, 1.0);
}

/// Amplitudes of the given nodes in bin j's sequence, by least squares.
inline std::vector<std::complex<double>> amplitudes_at_bin(const std::vector<Spectrum>& spectra, std::size_t j,
                                                           const std::vector<std::complex<double>>& nodes) {
    const auto M = static_cast<Eigen::Index>(spectra.size());
    const auto q = static_cast<Eigen::Index>(nodes.size());
    Matrix V(M, q);
    Vector p(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        p(m) = spectra[static_cast<std::size_t>(m)].bins[j];
        for (Eigen::Index k = 0; k < q; ++k) V(m, k) = std::pow(nodes[static_cast<std::size_t>(k)], static_cast<double>(m));
    }
    const Vector a = solve_least_squares(V, p, 1e-10);
    return {a.data(), a.data() + a.size()};
}

inline std::string describe_term(std::size_t bin, const ExponentialTerm& t) {
    return "bin " + std::to_string(bin) + " term |a|=" + std::to_string(std::abs(t.amplitude)) + " arg(z)=" + std::to_string(std::arg(t.z));
}

/// Order estimate and exponential fit of one peak bin.
inline BinFit fit_bin(std::size_t bin, const PronySequence& seq, const BinContext& ctx) {
    const HybridConfig& cfg = ctx.cfg;
    const std::size_t M = seq.size();
    BinFit out;
    out.diag.bin = bin;
    out.diag.sequence = seq;
    if (M == 1) {
        out.kept.push_back({seq.values[0], std::complex<double>{1.0, 0.0}, std::abs(seq.values[0])});
        return out;
    }
    if (M == 2) {
        // two streams: the shifted/unshifted ratio is the generator itself
        if (std::abs(seq.values[0]) < kDegenerateModulus) {
            out.diag.notes.push_back("unshifted bin value vanishes");
            return out;
        }
        const auto ratio = seq.values[1] / seq.values[0];
        if (!no_collision_test(ratio, cfg.prony.delta)) out.diag.notes.push_back("ratio off the unit circle; collision likely");
        out.kept.push_back({seq.values[0], ratio, std::abs(seq.values[0])});
        return out;
    }
    const std::size_t rows = default_pencil_rows(M);
    const double floor = cfg.prony.noise_gate > 0.0 ? noise_singular_floor(ctx.noise_sigma, rows, M - rows + 1, cfg.prony.noise_gate) : 0.0;
    out.diag.order = estimate_order(seq, cfg.prony.sigma_rel_tol, floor);
    const std::size_t q_max = (M - 1) / 2;
    out.order = std::min(out.diag.order.rank, q_max);
    if (out.order == 0) {
        out.diag.notes.push_back("no component above the rank threshold");
        return out;
    }
    const std::size_t q = std::min(q_max, out.order + cfg.prony.extra_terms);
    out.diag.fit_order = q;
    PencilFit fit;
    try {
        fit = pencil_decompose(seq, q, PencilOptions{cfg.prony.M_rows});
    } catch (const Error& e) {
        out.diag.notes.push_back(e.what());
        return out;
    }
    out.diag.residual = fit.residual;
    out.diag.terms = fit.terms;
    for (const auto& t : fit.terms) {
        if (out.kept.size() == out.order) break;
        if (std::abs(std::abs(t.z) - 1.0) <= cfg.prony.delta) out.kept.push_back(t);
    }
    return out;
}

/// Nodes fitted in a bin, extra terms included.
inline std::vector<std::complex<double>> fitted_nodes(const BinFit& f) {
    std::vector<std::complex<double>> nodes;
    for (const auto& t : f.kept) nodes.push_back(t.z);
    for (const auto& t : f.diag.terms) {
        if (std::find(nodes.begin(), nodes.end(), t.z) == nodes.end()) nodes.push_back(t.z);
    }
    return nodes;
}

/// Position of each kept term inside its bin. The neighbour bin values are
/// fitted on the home nodes plus the neighbour's own nodes, so tones that
/// belong to the neighbour do not bias the estimate.
inline std::vector<double> bin_offsets(const BinFit& home, const BinFit* up, const BinFit* down, const BinContext& ctx) {
    std::vector<double> offsets(home.kept.size(), 0.0);
    const HybridConfig& cfg = ctx.cfg;
    if (!cfg.refine_bins || cfg.wrap || ctx.spectra == nullptr || ctx.spectra->size() < 2 || ctx.n < 3 || home.kept.empty()) return offsets;
    const double node_tol = std::numbers::pi * static_cast<double>(cfg.s) / static_cast<double>(ctx.n * cfg.u);
    const std::vector<std::complex<double>> own = fitted_nodes(home);
    auto basis_with = [&](const BinFit* nb) {
        std::vector<std::complex<double>> nodes = own;
        if (nb == nullptr) return nodes;
        for (const auto& z : fitted_nodes(*nb)) {
            const bool shared = std::any_of(own.begin(), own.end(), [&](const auto& w) { return std::abs(std::arg(z / w)) <= node_tol; });
            if (!shared && nodes.size() + 1 < ctx.spectra->size()) nodes.push_back(z);
        }
        return nodes;
    };
    const std::size_t bin = home.diag.bin;
    const auto a_up = amplitudes_at_bin(*ctx.spectra, (bin + 1) % ctx.n, basis_with(up));
    const auto a_down = amplitudes_at_bin(*ctx.spectra, (bin + ctx.n - 1) % ctx.n, basis_with(down));
    for (std::size_t k = 0; k < home.kept.size(); ++k) {
        const int side = std::abs(a_up[k]) >= std::abs(a_down[k]) ? 1 : -1;
        offsets[k] = offset_from_neighbor(home.kept[k].amplitude, side > 0 ? a_up[k] : a_down[k], side, ctx.n);
    }
    return offsets;
}

/// Alias resolution of every kept term of one bin.
inline std::vector<TermOutcome> resolve_bin(const BinFit& home, const BinFit* up, const BinFit* down, const BinContext& ctx,
                                            std::vector<std::string>& notes) {
    const HybridConfig& cfg = ctx.cfg;
    const double R = ctx.rate_hz;
    const double scale = static_cast<double>(ctx.full_length) / static_cast<double>(ctx.n);
    const std::size_t bin = home.diag.bin;
    const std::size_t M = home.diag.sequence.size();

    std::vector<double> offsets(home.kept.size(), 0.0);
    try {
        offsets = bin_offsets(home, up, down, ctx);
    } catch (const Error& e) {
        notes.push_back(std::string("bin offset estimate: ") + e.what());
    }

    std::vector<TermOutcome> out;
    for (std::size_t k = 0; k < home.kept.size(); ++k) {
        const ExponentialTerm& term = home.kept[k];
        const double position = static_cast<double>(bin) + offsets[k];
        const Generator g_u{std::polar(1.0, 2.0 * std::numbers::pi * position / static_cast<double>(ctx.n)), cfg.u};
        const CandidateSet U = candidate_set(g_u, R);
        TermOutcome t{term, {}, {}};
        RecoveredComponent& comp = t.component;
        comp.source_bin = bin;
        comp.bin_offset = offsets[k];
        comp.collision_order = std::max<std::size_t>(home.order, 1);
        comp.residual = home.diag.residual;
        comp.amplitude = term.amplitude * scale;
        try {
            if (M == 1) {
                comp.freq_hz = U.candidates.front();
            } else {
                const Generator g_s{term.z, cfg.s};
                if (cfg.resolver == Resolver::Bezout) {
                    comp.freq_hz = resolve_bezout(g_u, g_s, bezout(cfg.u, cfg.s), R).freq_hz;
                    double nearest = std::numeric_limits<double>::infinity();
                    for (double fu : U.candidates) nearest = std::min(nearest, circular_distance(fu, comp.freq_hz, R));
                    comp.match_distance_hz = nearest;
                } else {
                    const MatchResult match = resolve_match(U, candidate_set(g_s, R), MatchOptions{cfg.match_tol_hz, cfg.ambiguity_factor, 1.0});
                    comp.freq_hz = match.freq_hz;
                    comp.match_distance_hz = match.match_distance_hz;
                }
            }
        } catch (const Error& e) {
            t.error = e.what();
        }
        out.push_back(std::move(t));
    }
    return out;
}

/// D(x) = sum_{l<n} exp(2 pi i x l / n): the short-DFT response at distance x
/// bins from a unit tone.
inline std::complex<double> dirichlet(double x, std::size_t n) {
    const double nd = static_cast<double>(n);
    const double frac = x / nd - std::round(x / nd);
    if (std::abs(frac) < 1e-12) return {nd, 0.0};
    const auto num = 1.0 - std::polar(1.0, 2.0 * std::numbers::pi * x);
    const auto den = 1.0 - std::polar(1.0, 2.0 * std::numbers::pi * frac);
    return num / den;
}

struct PlacedTone {
    double position; // in short-DFT bins
    std::size_t bin;
    std::complex<double> amplitude; // term amplitude at its own bin
    std::complex<double> z;

    friend bool operator==(const PlacedTone&, const PlacedTone&) = default;
};

/// Removes from bin j's sequence what the placed tones leak into it. Returns
/// false when nothing measurable was removed.
inline bool subtract_leakage(PronySequence& seq, const std::vector<PlacedTone>& placed, std::size_t j, std::size_t n) {
    bool changed = false;
    for (const auto& t : placed) {
        if (t.bin == j) continue;
        const auto home = dirichlet(t.position - static_cast<double>(t.bin), n);
        if (std::abs(home) < 1e-12) continue;
        const auto leak = t.amplitude * dirichlet(t.position - static_cast<double>(j), n) / home;
        if (!(std::abs(leak) > 1e-12 * std::abs(t.amplitude))) continue;
        changed = true;
        std::complex<double> power{1.0, 0.0};
        for (auto& v : seq.values) {
            v -= leak * power;
            power *= t.z;
        }
    }
    return changed;
}

struct LeakageContext {
    std::size_t u;
    std::size_t s;
    std::size_t n;
    double rate_hz;
};

/// True when term c (weaker, another bin) carries the node of resolved term a
/// and its amplitude is what a's tone leaks into c's bin.
inline bool explained_as_leakage(const TermOutcome& a, const TermOutcome& c, const LeakageContext& lc) {
    if (!a.error.empty() || a.component.source_bin == c.component.source_bin) return false;
    const double node_tol = 2.0 * std::numbers::pi * static_cast<double>(lc.s) / static_cast<double>(lc.n * lc.u);
    if (std::abs(std::arg(c.term.z / a.term.z)) > node_tol) return false;
    const double beta = static_cast<double>(a.component.source_bin) + a.component.bin_offset;
    const auto home = dirichlet(beta - static_cast<double>(a.component.source_bin), lc.n);
    if (std::abs(home) < 1e-12) return false;
    const auto leak = dirichlet(beta - static_cast<double>(c.component.source_bin), lc.n);
    const auto predicted = a.term.amplitude * leak / home;
    return std::abs(c.term.amplitude - predicted) <= 0.5 * std::abs(c.term.amplitude);
}

inline bool component_order(const RecoveredComponent& a, const RecoveredComponent& b) {
    const double ma = std::abs(a.amplitude), mb = std::abs(b.amplitude);
    if (ma != mb) return ma > mb;
    if (a.freq_hz != b.freq_hz) return a.freq_hz < b.freq_hz;
    return a.source_bin < b.source_bin;
}

/// Components closer than tol collapse onto the strongest one. Terms from the
/// same bin are a split of one component and add up; the same frequency seen
/// from another bin is leakage and is dropped.
inline std::vector<RecoveredComponent> merge_components(std::vector<RecoveredComponent> comps, double tol_hz, double rate_hz,
                                                        std::vector<std::string>* dropped = nullptr) {
    std::sort(comps.begin(), comps.end(), component_order);
    std::vector<RecoveredComponent> kept;
    for (const auto& c : comps) {
        RecoveredComponent* host = nullptr;
        double host_dist = std::numeric_limits<double>::infinity();
        for (auto& k : kept) {
            const double d = circular_distance(k.freq_hz, c.freq_hz, rate_hz);
            if (d < tol_hz && d < host_dist) {
                host = &k;
                host_dist = d;
            }
        }
        if (host == nullptr) {
            kept.push_back(c);
        } else if (host->source_bin == c.source_bin) {
            host->amplitude += c.amplitude;
        } else if (dropped != nullptr) {
            dropped->push_back("bin " + std::to_string(c.source_bin) + " duplicate of " + std::to_string(host->freq_hz) + " Hz from bin " +
                               std::to_string(host->source_bin));
        }
    }
    std::sort(kept.begin(), kept.end(), component_order);
    return kept;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Median of the lower half of the singular values of an M x n matrix.
inline double lower_half_singular_median(const Matrix& Y) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(Y * Y.adjoint(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues(); // ascending
    std::vector<double> low;
    for (Eigen::Index i = 0; i < (ev.size() + 1) / 2; ++i) low.push_back(std::sqrt(std::max(0.0, ev(i))));
    return median(std::move(low));
}

/// Noise level of the stream bins from the cross-stream matrix Y(m, j). The
/// signal part has rank at most the number of tones, so while that stays
/// below half of min(M, n) the lower singular values are noise alone, and
/// unlike bin magnitudes they are not lifted by leakage. Normalised by the
/// same statistic on unit complex Gaussian matrices (fixed seed).
inline double cross_stream_noise_sigma(const std::vector<Spectrum>& spectra) {
    const auto M = static_cast<Eigen::Index>(spectra.size());
    const auto n = static_cast<Eigen::Index>(spectra.empty() ? 0 : spectra.front().size());
    if (M < 3 || n < 3) return std::numeric_limits<double>::infinity();
    Matrix Y(M, n);
    for (Eigen::Index m = 0; m < M; ++m) {
        for (Eigen::Index j = 0; j < n; ++j) Y(m, j) = spectra[static_cast<std::size_t>(m)].bins[static_cast<std::size_t>(j)];
    }
    constexpr int kDraws = 16;
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    double unit = 0.0;
    Matrix G(M, n);
    for (int d = 0; d < kDraws; ++d) {
        for (Eigen::Index m = 0; m < M; ++m) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double re = gauss(rng);
                G(m, j) = {re, gauss(rng)};
            }
        }
        unit += lower_half_singular_median(G);
    }
    unit /= kDraws;
    return unit > 0.0 ? lower_half_singular_median(Y) / unit : std::numeric_limits<double>::infinity();
}

} // namespace detail

namespace detail {

/// analyze() with the per-bin stages visiting bins in visit_order, a
/// permutation of 0..(number of peak bins - 1); empty means ascending.
template <SampleSource Source>
SparseSpectrum analyze_in_order(const Source& source, double rate_hz, const HybridConfig& cfg, const std::vector<std::size_t>& visit_order) {
    cfg.validate();
    if (!(rate_hz > 0.0)) throw Error(ErrorCode::ConfigError, "rate must be positive");
    const std::size_t L = source.size();
    if (L == 0) throw Error(ErrorCode::BadShape, "empty signal");
    const StreamSpec spec = cfg.stream_spec(L);
    const std::size_t n = spec.n;

    SparseSpectrum result;
    result.config = cfg;
    result.rate_hz = rate_hz;
    result.full_length = L;
    Diagnostics& diag = result.diagnostics;
    diag.stream_length = n;
    diag.max_feasible_length = max_stream_length(L, cfg.u, cfg.s, cfg.M);
    diag.budget_formula_length = budget_stream_length(L, cfg.u, cfg.s, cfg.M);
    diag.effective_resolution_hz = rate_hz / (static_cast<double>(n) * static_cast<double>(cfg.u));

    const bool shortcut = cfg.shortcut_shifted && cfg.M > 1;
    StreamSet set{spec, {}, {}};
    const std::size_t full_streams = shortcut ? 1 : spec.M;
    set.streams.resize(full_streams);
    for (std::size_t m = 0; m < full_streams; ++m) set.streams[m] = extract_stream(source, rate_hz, spec, m, cfg.wrap);
    compute_spectra(set, cfg.threads);
    diag.stream_sample_counts.assign(spec.M, 0);
    for (std::size_t m = 0; m < full_streams; ++m) diag.stream_sample_counts[m] = n;

    // peak statistic: RMS over the available stream DFTs, per-sample units
    Spectrum stat{std::vector<std::complex<double>>(n), rate_hz / (static_cast<double>(n) * static_cast<double>(cfg.u))};
    std::vector<double> magnitudes;
    magnitudes.reserve(n * set.spectra.size());
    for (std::size_t j = 0; j < n; ++j) {
        double power = 0.0;
        for (const auto& sp : set.spectra) {
            const double a = std::abs(sp.bins[j]);
            power += a * a;
            magnitudes.push_back(a);
        }
        stat.bins[j] = std::sqrt(power / static_cast<double>(set.spectra.size())) / static_cast<double>(n);
    }
    // median |bin| of complex Gaussian noise is sigma * sqrt(ln 2)
    diag.noise_sigma = std::min(detail::median(std::move(magnitudes)) / std::sqrt(std::log(2.0)), detail::cross_stream_noise_sigma(set.spectra));
    const PeakList peaks = select_peaks(stat, cfg.threshold);

    std::map<std::size_t, PronySequence> sequences;
    if (!shortcut) {
        sequences = build_prony_sequences(set, peaks);
    } else {
        for (const Peak& p : peaks.entries) {
            PronySequence seq{std::vector<std::complex<double>>(spec.M), spec.s};
            seq.values[0] = set.spectra[0].bins[p.bin];
            sequences.emplace(p.bin, std::move(seq));
        }
        for (std::size_t m = 1; m < spec.M && !peaks.empty(); ++m) {
            std::vector<std::complex<double>> values(peaks.size());
            try {
                values = shifted_coeffs_shortcut(source, peaks, spec, m, cfg.wrap).values;
                diag.stream_sample_counts[m] = peaks.size();
            } catch (const Error& e) {
                if (e.code() != ErrorCode::IllConditionedVandermonde) throw;
                const Spectrum full = dft(extract_stream(source, rate_hz, spec, m, cfg.wrap));
                for (std::size_t k = 0; k < peaks.size(); ++k) values[k] = full.bins[peaks.entries[k].bin];
                diag.stream_sample_counts[m] = n;
                ++diag.shortcut_fallbacks;
            }
            for (std::size_t k = 0; k < peaks.size(); ++k) sequences[peaks.entries[k].bin].values[m] = values[k];
        }
    }
    for (auto c : diag.stream_sample_counts) diag.samples_used += c;

    std::vector<std::size_t> bins;
    for (const auto& [bin, _] : sequences) bins.push_back(bin);
    const detail::BinContext ctx{cfg, rate_hz, L, n, diag.noise_sigma, shortcut ? nullptr : &set.spectra};
    if (!visit_order.empty() && visit_order.size() != bins.size()) throw Error(ErrorCode::BadShape, "visit order must cover every peak bin");
    auto visit = [&](std::size_t v) { return visit_order.empty() ? v : visit_order[v]; };
    std::vector<detail::BinFit> fits(bins.size());
    parallel_for(bins.size(), cfg.threads, [&](std::size_t v) {
        const std::size_t i = visit(v);
        fits[i] = detail::fit_bin(bins[i], sequences.at(bins[i]), ctx);
    });
    std::map<std::size_t, std::size_t> fit_index;
    for (std::size_t i = 0; i < bins.size(); ++i) fit_index.emplace(bins[i], i);
    auto fit_at = [&](std::size_t j) -> const detail::BinFit* {
        const auto it = fit_index.find(j % n);
        return it == fit_index.end() ? nullptr : &fits[it->second];
    };
    // First pass: every bin on its own.
    std::vector<std::vector<detail::TermOutcome>> first(bins.size());
    parallel_for(bins.size(), cfg.threads, [&](std::size_t v) {
        const std::size_t i = visit(v);
        first[i] = detail::resolve_bin(fits[i], fit_at(bins[i] + 1), fit_at(bins[i] + n - 1), ctx, fits[i].diag.notes);
    });
    // Later passes: a bin is refitted after the leakage of the tones found in
    // stronger bins is taken out of its sequence. The strongest k bins are
    // final after k passes, so repeating until nothing moves gives the
    // strongest-first sequential result without depending on the schedule.
    // Tones are summed in peak rank order for the same reason.
    std::vector<std::size_t> rank(bins.size());
    for (std::size_t r = 0; r < peaks.size(); ++r) rank[fit_index.at(peaks.entries[r].bin)] = r;
    auto place = [&](const std::vector<std::vector<detail::TermOutcome>>& outcomes) {
        std::vector<std::vector<detail::PlacedTone>> at(peaks.size());
        for (std::size_t i = 0; i < bins.size(); ++i) {
            for (const auto& t : outcomes[i]) {
                if (t.error.empty()) at[rank[i]].push_back({static_cast<double>(bins[i]) + t.component.bin_offset, bins[i], t.term.amplitude, t.term.z});
            }
        }
        return at;
    };
    std::vector<std::vector<detail::TermOutcome>> resolved = first;
    std::vector<BinDiagnostics> bin_diags(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) bin_diags[i] = fits[i].diag;
    std::vector<std::vector<detail::PlacedTone>> placed_at = place(resolved);
    for (std::size_t pass = 1; cfg.M >= 3 && pass < peaks.size(); ++pass) {
        std::vector<std::vector<detail::TermOutcome>> next(bins.size());
        parallel_for(bins.size(), cfg.threads, [&](std::size_t v) {
            const std::size_t i = visit(v);
            std::vector<detail::PlacedTone> stronger;
            for (std::size_t r = 0; r < rank[i]; ++r) stronger.insert(stronger.end(), placed_at[r].begin(), placed_at[r].end());
            PronySequence cleaned = sequences.at(bins[i]);
            if (detail::subtract_leakage(cleaned, stronger, bins[i], n)) {
                detail::BinFit home = detail::fit_bin(bins[i], cleaned, ctx);
                home.diag.notes.push_back("refitted without the leakage of stronger bins");
                next[i] = detail::resolve_bin(home, fit_at(bins[i] + 1), fit_at(bins[i] + n - 1), ctx, home.diag.notes);
                bin_diags[i] = std::move(home.diag);
            } else {
                next[i] = first[i];
                bin_diags[i] = fits[i].diag;
            }
        });
        resolved = std::move(next);
        auto moved = place(resolved);
        if (moved == placed_at) break;
        placed_at = std::move(moved);
    }

    std::vector<detail::TermOutcome> terms;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        for (auto& t : resolved[i]) terms.push_back(std::move(t));
        diag.bins.push_back(std::move(bin_diags[i]));
    }
    // strongest first; ties by bin then node angle keep the order total
    std::sort(terms.begin(), terms.end(), [](const detail::TermOutcome& a, const detail::TermOutcome& b) {
        const double ea = std::abs(a.term.amplitude), eb = std::abs(b.term.amplitude);
        if (ea != eb) return ea > eb;
        if (a.component.source_bin != b.component.source_bin) return a.component.source_bin < b.component.source_bin;
        return std::arg(a.term.z) < std::arg(b.term.z);
    });
    const detail::LeakageContext lc{cfg.u, cfg.s, n, rate_hz};
    std::vector<const detail::TermOutcome*> accepted;
    std::vector<RecoveredComponent> all;
    for (const auto& t : terms) {
        const std::string label = detail::describe_term(t.component.source_bin, t.term);
        if (cfg.M >= 2) {
            const auto leak = std::find_if(accepted.begin(), accepted.end(), [&](const detail::TermOutcome* a) { return detail::explained_as_leakage(*a, t, lc); });
            if (leak != accepted.end()) {
                diag.leakage_dropped.push_back(label + ": leakage of bin " + std::to_string((*leak)->component.source_bin));
                continue;
            }
        }
        accepted.push_back(&t);
        if (!t.error.empty()) {
            diag.unresolved.push_back(label + ": " + t.error);
        } else if (std::abs(t.component.amplitude) < cfg.threshold * static_cast<double>(L)) {
            diag.leakage_dropped.push_back(label + ": below threshold after resolution");
        } else {
            all.push_back(t.component);
        }
    }
    const double merge_tol = cfg.merge_tol_hz >= 0.0 ? cfg.merge_tol_hz : 0.5 * diag.effective_resolution_hz;
    result.components = detail::merge_components(std::move(all), merge_tol, rate_hz, &diag.leakage_dropped);
    return result;
}

} // namespace detail

/// Full hybrid analysis of any indexable sample source. Reads at most M * n
/// samples (fewer with shortcut_shifted).
template <SampleSource Source>
SparseSpectrum analyze(const Source& source, double rate_hz, const HybridConfig& cfg) {
    return detail::analyze_in_order(source, rate_hz, cfg, {});
}

inline SparseSpectrum analyze(const ComplexSignal& x, const HybridConfig& cfg) { return analyze(x.samples, x.rate_hz, cfg); }

/// Baseline: full-length DFT, bins with |X_j| >= T * N as components.
inline SparseSpectrum dense_reference(const ComplexSignal& x, double T) {
    if (!(T >= 0.0)) throw Error(ErrorCode::ConfigError, "threshold must be non-negative");
    const Spectrum X = dft(x);
    const std::size_t N = X.size();
    SparseSpectrum out;
    out.config.threshold = T;
    out.rate_hz = x.rate_hz;
    out.full_length = N;
    out.diagnostics.stream_length = N;
    out.diagnostics.samples_used = N;
    out.diagnostics.effective_resolution_hz = X.bin_hz;
    for (const Peak& p : select_peaks(X, T * static_cast<double>(N)).entries) {
        RecoveredComponent c;
        c.freq_hz = static_cast<double>(p.bin) * X.bin_hz;
        c.amplitude = X.bins[p.bin];
        c.source_bin = p.bin;
        out.components.push_back(c);
    }
    std::sort(out.components.begin(), out.components.end(), detail::component_order);
    return out;
}

} // namespace hfp
