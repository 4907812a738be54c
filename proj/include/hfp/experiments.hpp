#pragma once

// Reference experiments: three colliding-tone signals at R = 1 kHz, and an
// eight-tone signal at R = 10 kHz with close pairs, analysed from streams of
// stride 142. Each run writes plain CSV files into its own directory.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hfp/config.hpp"
#include "hfp/io.hpp"
#include "hfp/pipeline.hpp"
#include "hfp/signal_lab.hpp"

namespace hfp {

inline SynthSpec experiment1_signal(int which, double snr_db = 30.0, std::uint64_t seed = 0) {
    if (which < 1 || which > 3) throw Error(ErrorCode::ConfigError, "experiment 1 has signals 1, 2 and 3");
    const std::vector<ToneSpec> all{
        {125.0, {1.0, 0.0}},
        {165.0, std::polar(1.0, std::numbers::pi / 3.0)},
        {245.0, std::polar(1.0, std::numbers::pi / 4.0)},
    };
    SynthSpec spec;
    spec.tones.assign(all.begin(), all.begin() + which);
    spec.rate_hz = 1000.0;
    spec.length = 1000;
    spec.snr_db = snr_db;
    spec.seed = seed;
    return spec;
}

inline HybridConfig experiment1_config(std::size_t threads = 1) {
    HybridConfig cfg;
    cfg.u = 50;
    cfg.s = 17;
    cfg.M = 12;
    cfg.length_policy = LengthPolicy::Budget;
    cfg.threshold = 0.2;
    cfg.threads = threads;
    return cfg;
}

inline const std::vector<double>& experiment2_frequencies() {
    static const std::vector<double> mu{100.0, 100.3, 100.92, 4000.0, 4000.3, 4000.7, 765.0, 787.0};
    return mu;
}

/// Amplitudes: modulus uniform on [0.5, 1.5], phase uniform on [0, 2 pi),
/// drawn from a generator independent of the noise stream.
inline SynthSpec experiment2_signal(std::optional<double> snr_db, std::uint64_t seed = 0) {
    std::seed_seq seq{seed, std::uint64_t{2}};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> modulus(0.5, 1.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    SynthSpec spec;
    for (double mu : experiment2_frequencies()) {
        const double a = modulus(rng);
        const double p = phase(rng);
        spec.tones.push_back({mu, std::polar(a, p)});
    }
    spec.rate_hz = 10000.0;
    spec.length = std::size_t{1} << 16;
    spec.snr_db = snr_db;
    spec.seed = seed;
    return spec;
}

inline HybridConfig experiment2_config(std::size_t M, std::size_t threads = 1) {
    HybridConfig cfg;
    cfg.u = 142;
    cfg.s = 7;
    cfg.M = M;
    cfg.length_policy = LengthPolicy::Budget;
    cfg.threshold = 0.2;
    cfg.threads = threads;
    return cfg;
}

struct ExperimentRun {
    SynthSpec truth;
    SparseSpectrum result;
    SparseSpectrum dense;
    EvalReport eval;
};

namespace detail {

inline void write_eval_csv(std::ostream& os, const EvalReport& rep, double N) {
    os << "kind,true_freq_hz,freq_hz,freq_error_hz,amplitude_error,true_re,true_im,re,im\n";
    for (const auto& m : rep.matched) {
        const auto a = m.recovered.amplitude / N;
        os << "matched," << format_double(m.truth.mu_hz) << ',' << format_double(m.recovered.freq_hz) << ',' << format_double(m.freq_error_hz)
           << ',' << format_double(m.amplitude_error) << ',' << format_double(m.truth.amplitude.real()) << ','
           << format_double(m.truth.amplitude.imag()) << ',' << format_double(a.real()) << ',' << format_double(a.imag()) << '\n';
    }
    for (const auto& t : rep.missed) {
        os << "missed," << format_double(t.mu_hz) << ",,,," << format_double(t.amplitude.real()) << ',' << format_double(t.amplitude.imag())
           << ",,\n";
    }
    for (const auto& c : rep.spurious) {
        const auto a = c.amplitude / N;
        os << "spurious,," << format_double(c.freq_hz) << ",,,,," << format_double(a.real()) << ',' << format_double(a.imag()) << '\n';
    }
    os << "precision," << format_double(rep.precision) << "\nrecall," << format_double(rep.recall) << '\n';
}

inline void write_manifest(std::ostream& os, const SynthSpec& truth, const SparseSpectrum& r) {
    const auto& d = r.diagnostics;
    os << to_text(r.config) << "threads = " << r.config.threads << '\n'
       << "rate_hz = " << format_double(truth.rate_hz) << '\n'
       << "length = " << truth.length << '\n'
       << "snr_db = " << (truth.snr_db ? format_double(*truth.snr_db) : std::string("none")) << '\n'
       << "seed = " << truth.seed << '\n'
       << "stream_length = " << d.stream_length << '\n'
       << "max_feasible_length = " << d.max_feasible_length << '\n'
       << "budget_formula_length = " << d.budget_formula_length << '\n'
       << "samples_used = " << d.samples_used << '\n'
       << "effective_resolution_hz = " << format_double(d.effective_resolution_hz) << '\n'
       << "noise_sigma = " << format_double(d.noise_sigma) << '\n'
       << "components = " << r.components.size() << '\n';
    for (const auto& t : truth.tones) {
        os << "tone = " << format_double(t.mu_hz) << ',' << format_double(t.amplitude.real()) << ',' << format_double(t.amplitude.imag()) << '\n';
    }
    for (const auto& note : d.unresolved) os << "unresolved = " << note << '\n';
}

inline void write_prony_csv(std::ostream& os, const BinDiagnostics& b) {
    os << "kind,index,re,im,magnitude\n";
    for (std::size_t m = 0; m < b.sequence.values.size(); ++m) {
        const auto v = b.sequence.values[m];
        os << "sequence," << m << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << ',' << format_double(std::abs(v)) << '\n';
    }
    for (std::size_t k = 0; k < b.order.singular_values.size(); ++k) {
        os << "singular_value," << k << ",,," << format_double(b.order.singular_values[k]) << '\n';
    }
    for (std::size_t k = 0; k < b.terms.size(); ++k) {
        const auto& t = b.terms[k];
        os << "term_amplitude," << k << ',' << format_double(t.amplitude.real()) << ',' << format_double(t.amplitude.imag()) << ','
           << format_double(std::abs(t.amplitude)) << '\n';
        os << "term_z," << k << ',' << format_double(t.z.real()) << ',' << format_double(t.z.imag()) << ',' << format_double(std::abs(t.z)) << '\n';
    }
}

inline void write_streams_csv(std::ostream& os, const StreamSet& set) {
    os << "stream,bin_index,freq_hz,re,im,magnitude\n";
    for (std::size_t m = 0; m < set.spectra.size(); ++m) {
        const Spectrum& X = set.spectra[m];
        for (std::size_t j = 0; j < X.size(); ++j) {
            os << m << ',' << j << ',' << format_double(static_cast<double>(j) * X.bin_hz) << ',' << format_double(X.bins[j].real()) << ','
               << format_double(X.bins[j].imag()) << ',' << format_double(std::abs(X.bins[j])) << '\n';
        }
    }
}

inline std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::ParseError, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

inline ExperimentRun run_and_report(const SynthSpec& truth, const HybridConfig& cfg, double tol_hz, const std::filesystem::path& dir,
                                    bool with_streams) {
    const ComplexSignal x = synthesize(truth);
    ExperimentRun run{truth, analyze(x, cfg), dense_reference(x, cfg.threshold), {}};
    run.eval = evaluate(truth, run.result, tol_hz);
    if (dir.empty()) return run;
    prepare_dir(dir);
    const double N = static_cast<double>(x.size());
    write_file((dir / "config.txt").string(), [&](std::ostream& os) { write_manifest(os, truth, run.result); });
    write_file((dir / "spectrum.csv").string(), [&](std::ostream& os) { write_components_csv(os, run.result); });
    write_file((dir / "dense.csv").string(), [&](std::ostream& os) { write_components_csv(os, run.dense); });
    write_file((dir / "eval.csv").string(), [&](std::ostream& os) { write_eval_csv(os, run.eval, N); });
    if (with_streams) {
        StreamSet set = extract_streams(x, cfg.stream_spec(x.size()), cfg.wrap);
        compute_spectra(set, cfg.threads);
        write_file((dir / "streams.csv").string(), [&](std::ostream& os) { write_streams_csv(os, set); });
        for (const auto& b : run.result.diagnostics.bins) {
            write_file((dir / ("prony_" + std::to_string(b.bin) + ".csv")).string(), [&](std::ostream& os) { write_prony_csv(os, b); });
        }
    }
    return run;
}

} // namespace detail

/// All three signals; files go to out_dir/signal<k>/ unless out_dir is empty.
inline std::vector<ExperimentRun> run_experiment_1(const std::filesystem::path& out_dir, double snr_db = 30.0, std::uint64_t seed = 0,
                                                   std::size_t threads = 1) {
    std::vector<ExperimentRun> runs;
    for (int k = 1; k <= 3; ++k) {
        const auto dir = out_dir.empty() ? out_dir : out_dir / ("signal" + std::to_string(k));
        runs.push_back(detail::run_and_report(experiment1_signal(k, snr_db, seed), experiment1_config(threads), 0.5, dir, true));
    }
    return runs;
}

struct BudgetLine {
    std::size_t stream_length = 0;
    std::size_t samples_used = 0;
    std::size_t budget_formula_samples = 0; // floor((L - (s-1) M) / u) * M
    double effective_resolution_hz = 0.0;
    double dense_same_budget_resolution_hz = 0.0;
    double dense_full_resolution_hz = 0.0;
};

inline BudgetLine budget_line(const SparseSpectrum& r) {
    const auto& d = r.diagnostics;
    BudgetLine b;
    b.stream_length = d.stream_length;
    b.samples_used = d.samples_used;
    b.budget_formula_samples = d.budget_formula_length * r.config.M;
    b.effective_resolution_hz = d.effective_resolution_hz;
    b.dense_same_budget_resolution_hz = r.rate_hz / static_cast<double>(d.samples_used);
    b.dense_full_resolution_hz = r.rate_hz / static_cast<double>(r.full_length);
    return b;
}

/// Components (hybrid and dense) within +-half_width_hz of each true tone.
inline void write_zoom_csv(std::ostream& os, const ExperimentRun& run, double half_width_hz = 2.0) {
    const double N = static_cast<double>(run.result.full_length);
    os << "center_hz,method,freq_hz,magnitude\n";
    for (double mu : experiment2_frequencies()) {
        for (const auto* sp : {&run.result, &run.dense}) {
            const char* method = sp == &run.result ? "hybrid" : "dense";
            for (const auto& c : sp->components) {
                if (circular_distance(c.freq_hz, mu, run.result.rate_hz) <= half_width_hz) {
                    os << format_double(mu) << ',' << method << ',' << format_double(c.freq_hz) << ',' << format_double(std::abs(c.amplitude) / N)
                       << '\n';
                }
            }
        }
    }
}

inline ExperimentRun run_experiment_2(const std::filesystem::path& out_dir, std::size_t M, std::optional<double> snr_db, std::uint64_t seed = 0,
                                      std::size_t threads = 1, double tol_hz = 0.4) {
    if (M != 8 && M != 16 && M != 28) throw Error(ErrorCode::ConfigError, "experiment 2 runs with M = 8, 16 or 28");
    ExperimentRun run = detail::run_and_report(experiment2_signal(snr_db, seed), experiment2_config(M, threads), tol_hz, out_dir, false);
    if (out_dir.empty()) return run;
    write_file((out_dir / "zoom.csv").string(), [&](std::ostream& os) { write_zoom_csv(os, run); });
    const BudgetLine b = budget_line(run.result);
    write_file((out_dir / "budget.txt").string(), [&](std::ostream& os) {
        os << "stream_length = " << b.stream_length << '\n'
           << "samples_used = " << b.samples_used << '\n'
           << "budget_formula_samples = " << b.budget_formula_samples << '\n'
           << "effective_resolution_hz = " << format_double(b.effective_resolution_hz) << '\n'
           << "dense_same_budget_resolution_hz = " << format_double(b.dense_same_budget_resolution_hz) << '\n'
           << "dense_full_resolution_hz = " << format_double(b.dense_full_resolution_hz) << '\n';
    });
    return run;
}

} // namespace hfp
