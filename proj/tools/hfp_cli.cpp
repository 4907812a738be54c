// hfp: synthesis, hybrid analysis, dense DFT baseline and reference experiments.
//
// Exit codes: 0 success, 1 usage, 2 data or configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hfp/hfp.hpp"

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct AnalyzeFlags {
    std::string in, out, config, format = "csv", resolver;
    double rate = 0.0;
    std::size_t u = 0, s = 0, M = 0, extra_terms = 0, threads = 1;
    double threshold = 0.0, sigma_tol = 0.0;
    bool wrap = false, shortcut = false;
};

hfp::ComplexSignal load(const std::string& path, double rate, const std::string& format) {
    return hfp::read_signal(path, rate, hfp::parse_signal_format(format));
}

void print_summary(const hfp::SparseSpectrum& r) {
    std::printf("components=%zu samples_used=%zu of %zu resolution_hz=%.6g unresolved=%zu\n", r.components.size(), r.diagnostics.samples_used,
                r.full_length, r.diagnostics.effective_resolution_hz, r.diagnostics.unresolved.size());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse spectral estimation from shifted undersampled streams"};
    app.require_subcommand(1, 1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a multitone signal from a key = value spec file");
    std::string synth_spec, synth_out, synth_format = "csv";
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--spec", synth_spec, "Spec file: rate_hz, length, snr_db, seed, tone = mu,re,im")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "Output signal file")->required();
    synth->add_option("--seed", synth_seed, "Override the spec seed");
    synth->add_option("--format", synth_format, "csv or raw64")->check(CLI::IsMember({"csv", "raw64"}));

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Hybrid analysis of a signal file");
    AnalyzeFlags af;
    analyze->add_option("--in", af.in, "Input signal")->required()->check(CLI::ExistingFile);
    analyze->add_option("--rate", af.rate, "Sample rate in Hz")->required();
    analyze->add_option("--out", af.out, "Components CSV");
    analyze->add_option("--config", af.config, "key = value config file; flags override it")->check(CLI::ExistingFile);
    analyze->add_option("--format", af.format, "csv or raw64")->check(CLI::IsMember({"csv", "raw64"}));
    auto* o_u = analyze->add_option("--u", af.u, "Undersampling stride");
    auto* o_s = analyze->add_option("--s", af.s, "Shift between streams");
    auto* o_M = analyze->add_option("--M", af.M, "Number of shifted streams");
    auto* o_T = analyze->add_option("--threshold", af.threshold, "Peak threshold, per-sample amplitude units");
    auto* o_res = analyze->add_option("--resolver", af.resolver, "match or bezout")->check(CLI::IsMember({"match", "bezout"}));
    auto* o_extra = analyze->add_option("--extra-terms", af.extra_terms, "Extra exponential terms fitted per bin");
    auto* o_tol = analyze->add_option("--sigma-tol", af.sigma_tol, "Relative singular value cut for the order estimate");
    auto* o_wrap = analyze->add_flag("--wrap", af.wrap, "Index the record periodically");
    auto* o_short = analyze->add_flag("--shortcut", af.shortcut, "Shifted bin values from the Vandermonde shortcut");
    auto* o_thr = analyze->add_option("--threads", af.threads, "Worker threads, 0 = all cores");

    // dft
    auto* dft = app.add_subcommand("dft", "Dense DFT of a signal file");
    std::string dft_in, dft_out, dft_format = "csv";
    double dft_rate = 0.0, dft_threshold = 0.0;
    dft->add_option("--in", dft_in, "Input signal")->required()->check(CLI::ExistingFile);
    dft->add_option("--rate", dft_rate, "Sample rate in Hz")->required();
    dft->add_option("--out", dft_out, "Spectrum CSV")->required();
    dft->add_option("--threshold", dft_threshold, "Keep bins with |X_j| / N >= threshold");
    dft->add_option("--format", dft_format, "csv or raw64")->check(CLI::IsMember({"csv", "raw64"}));

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a reference experiment and write CSV reports");
    int exp_id = 1;
    std::size_t exp_M = 28, exp_threads = 1;
    std::optional<double> exp_snr;
    std::uint64_t exp_seed = 0;
    std::string exp_out;
    exp->add_option("--id", exp_id, "1 (colliding tones) or 2 (close tones)")->required()->check(CLI::IsMember({1, 2}));
    exp->add_option("--M", exp_M, "Streams for experiment 2: 8, 16 or 28")->check(CLI::IsMember({8, 16, 28}));
    exp->add_option("--snr", exp_snr, "SNR in dB (experiment 1 default 30, experiment 2 default noise-free)");
    exp->add_option("--seed", exp_seed, "Noise and amplitude seed");
    exp->add_option("--threads", exp_threads, "Worker threads, 0 = all cores");
    exp->add_option("--out", exp_out, "Output directory")->required();

    // selftest
    auto* selftest = app.add_subcommand("selftest", "Noise-free oracle equivalence against the dense DFT");
    hfp::SelftestOptions st;
    selftest->add_option("--trials", st.trials, "Random instances");
    selftest->add_option("--seed", st.seed, "Instance seed");
    selftest->add_option("--threads", st.threads, "Worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*synth) {
            hfp::SynthSpec spec = hfp::parse_synth_spec(hfp::read_key_value_file(synth_spec));
            if (synth_seed) spec.seed = *synth_seed;
            const hfp::ComplexSignal x = hfp::synthesize(spec);
            if (synth_format == "raw64") {
                hfp::write_file(synth_out, [&](std::ostream& os) { hfp::write_signal_raw64(os, x); }, true);
            } else {
                hfp::write_file(synth_out, [&](std::ostream& os) { hfp::write_signal_csv(os, x); });
            }
        } else if (*analyze) {
            hfp::HybridConfig cfg;
            if (!af.config.empty()) cfg = hfp::parse_hybrid_config(hfp::read_key_value_file(af.config));
            if (o_u->count() > 0) cfg.u = af.u;
            if (o_s->count() > 0) cfg.s = af.s;
            if (o_M->count() > 0) cfg.M = af.M;
            if (o_T->count() > 0) cfg.threshold = af.threshold;
            if (o_res->count() > 0) cfg.resolver = hfp::parse_resolver(af.resolver);
            if (o_extra->count() > 0) cfg.prony.extra_terms = af.extra_terms;
            if (o_tol->count() > 0) cfg.prony.sigma_rel_tol = af.sigma_tol;
            if (o_wrap->count() > 0) cfg.wrap = af.wrap;
            if (o_short->count() > 0) cfg.shortcut_shifted = af.shortcut;
            if (o_thr->count() > 0) cfg.threads = af.threads;
            cfg.validate();
            const hfp::ComplexSignal x = load(af.in, af.rate, af.format);
            const hfp::SparseSpectrum r = hfp::analyze(x, cfg);
            if (!af.out.empty()) hfp::write_file(af.out, [&](std::ostream& os) { hfp::write_components_csv(os, r); });
            print_summary(r);
        } else if (*dft) {
            if (!(dft_threshold >= 0.0)) throw hfp::Error(hfp::ErrorCode::ConfigError, "threshold must be non-negative");
            const hfp::ComplexSignal x = load(dft_in, dft_rate, dft_format);
            const hfp::Spectrum X = hfp::dft(x);
            if (dft_threshold > 0.0) {
                hfp::write_file(dft_out, [&](std::ostream& os) {
                    os << "bin_index,freq_hz,re,im,magnitude\n";
                    const double cut = dft_threshold * static_cast<double>(X.size());
                    for (std::size_t j = 0; j < X.size(); ++j) {
                        if (std::abs(X.bins[j]) < cut) continue;
                        os << j << ',' << hfp::format_double(static_cast<double>(j) * X.bin_hz) << ',' << hfp::format_double(X.bins[j].real())
                           << ',' << hfp::format_double(X.bins[j].imag()) << ',' << hfp::format_double(std::abs(X.bins[j])) << '\n';
                    }
                });
            } else {
                hfp::write_file(dft_out, [&](std::ostream& os) { hfp::write_spectrum_csv(os, X); });
            }
        } else if (*exp) {
            const std::filesystem::path dir = exp_out;
            if (exp_id == 1) {
                const auto runs = hfp::run_experiment_1(dir, exp_snr.value_or(30.0), exp_seed, exp_threads);
                for (std::size_t k = 0; k < runs.size(); ++k) {
                    std::printf("signal%zu recall=%.3g precision=%.3g components=%zu samples_used=%zu\n", k + 1, runs[k].eval.recall,
                                runs[k].eval.precision, runs[k].result.components.size(), runs[k].result.diagnostics.samples_used);
                }
            } else {
                const auto run = hfp::run_experiment_2(dir, exp_M, exp_snr, exp_seed, exp_threads);
                const auto b = hfp::budget_line(run.result);
                std::printf("recall=%.3g precision=%.3g samples_used=%zu resolution_hz=%.6g dense_same_budget_hz=%.6g\n", run.eval.recall,
                            run.eval.precision, b.samples_used, b.effective_resolution_hz, b.dense_same_budget_resolution_hz);
            }
        } else if (*selftest) {
            const hfp::SelftestReport rep = hfp::run_selftest(st);
            for (const auto& f : rep.failures) std::fprintf(stderr, "%s\n", f.c_str());
            std::printf("selftest %zu/%zu passed (%zu with collisions)\n", rep.passed, rep.trials, rep.collisions);
            return rep.ok() ? kOk : kNumerical;
        }
    } catch (const hfp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.family() == hfp::ErrorFamily::Numerical ? kNumerical : kData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    }
    return kOk;
}
