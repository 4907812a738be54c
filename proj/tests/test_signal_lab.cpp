#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hfp/experiments.hpp"
#include "hfp/signal_lab.hpp"
#include "oracles.hpp"

using hfp::cd;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hfp_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST(Synth, CleanToneFormula) {
    hfp::SynthSpec spec;
    spec.tones = {{125.0, {1.0, 0.0}}, {37.5, {0.0, 2.0}}};
    spec.rate_hz = 1000.0;
    spec.length = 1000;
    const auto x = hfp::synthesize(spec);
    ASSERT_EQ(x.size(), 1000u);
    EXPECT_DOUBLE_EQ(x.rate_hz, 1000.0);
    for (std::size_t l : {0u, 1u, 17u, 999u}) {
        // 125 Hz and 37.5 Hz at 1 kHz: rational turns, exact via unit_root
        const cd ref = oracle::unit_root(static_cast<long long>(125 * l), 1000) + cd(0, 2) * oracle::unit_root(static_cast<long long>(75 * l), 2000);
        EXPECT_LE(std::abs(x.samples[l] - ref), 1e-12) << l;
    }
}

TEST(Synth, EmptyToneListIsSilent) {
    hfp::SynthSpec spec;
    spec.length = 16;
    for (const auto& v : hfp::synthesize(spec).samples) EXPECT_EQ(v, cd(0, 0));
}

TEST(Synth, OnGridSupportMatchesDense) {
    hfp::SynthSpec spec;
    spec.tones = {{100.0, {1.0, 0.0}}, {250.0, {0.5, 0.5}}};
    spec.rate_hz = 1000.0;
    spec.length = 1000;
    const auto d = hfp::dense_reference(hfp::synthesize(spec), 0.1);
    ASSERT_EQ(d.components.size(), 2u);
    EXPECT_NEAR(d.components[0].freq_hz, 100.0, 1e-9);
    EXPECT_NEAR(d.components[1].freq_hz, 250.0, 1e-9);
}

TEST(Synth, SeededAndReproducible) {
    auto spec = hfp::experiment1_signal(3, 10.0, 42);
    const auto a = hfp::synthesize(spec);
    const auto b = hfp::synthesize(spec);
    EXPECT_EQ(a.samples, b.samples);
    spec.seed = 43;
    EXPECT_NE(a.samples, hfp::synthesize(spec).samples);
}

TEST(Synth, MeasuredSnrIsCalibrated) {
    hfp::SynthSpec spec = hfp::experiment1_signal(3, 7.0, 0);
    const auto clean = hfp::synthesize_clean(spec);
    const double ps = hfp::mean_power(clean.samples);
    double sum_db = 0.0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        spec.seed = seed;
        const auto noisy = hfp::synthesize(spec);
        double pn = 0.0;
        for (std::size_t l = 0; l < noisy.size(); ++l) pn += std::norm(noisy.samples[l] - clean.samples[l]);
        pn /= static_cast<double>(noisy.size());
        sum_db += 10.0 * std::log10(ps / pn);
    }
    EXPECT_NEAR(sum_db / 500.0, 7.0, 0.2);
}

TEST(Synth, SpecFile) {
    const auto spec = hfp::parse_synth_spec(hfp::parse_key_values(
        "rate_hz = 1000\nlength = 64\nsnr_db = 20 # dB\nseed = 9\ntone = 125, 1, 0\ntone = 165,0.5,-0.5\n"));
    EXPECT_EQ(spec.length, 64u);
    ASSERT_TRUE(spec.snr_db.has_value());
    EXPECT_EQ(*spec.snr_db, 20.0);
    EXPECT_EQ(spec.seed, 9u);
    ASSERT_EQ(spec.tones.size(), 2u);
    EXPECT_EQ(spec.tones[1].amplitude, cd(0.5, -0.5));
    EXPECT_FALSE(hfp::parse_synth_spec(hfp::parse_key_values("snr_db = none\n")).snr_db.has_value());
    EXPECT_THROW((void)hfp::parse_synth_spec(hfp::parse_key_values("tone = 1,2\n")), hfp::Error);
    EXPECT_THROW((void)hfp::parse_synth_spec(hfp::parse_key_values("colour = red\n")), hfp::Error);
    EXPECT_THROW((void)hfp::parse_synth_spec(hfp::parse_key_values("length = 0\n")), hfp::Error);
}

TEST(Evaluate, PerfectAndSpurious) {
    auto truth = hfp::experiment1_signal(3);
    hfp::SparseSpectrum r;
    r.rate_hz = 1000.0;
    r.full_length = 1000;
    for (const auto& t : truth.tones) {
        hfp::RecoveredComponent c;
        c.freq_hz = t.mu_hz;
        c.amplitude = t.amplitude * 1000.0;
        r.components.push_back(c);
    }
    auto rep = hfp::evaluate(truth, r, 0.5);
    EXPECT_EQ(rep.precision, 1.0);
    EXPECT_EQ(rep.recall, 1.0);
    for (const auto& m : rep.matched) EXPECT_NEAR(m.amplitude_error, 0.0, 1e-12);

    hfp::RecoveredComponent extra;
    extra.freq_hz = 500.0;
    extra.amplitude = 300.0;
    r.components.push_back(extra);
    rep = hfp::evaluate(truth, r, 0.5);
    EXPECT_DOUBLE_EQ(rep.precision, 0.75);
    EXPECT_EQ(rep.recall, 1.0);
    ASSERT_EQ(rep.spurious.size(), 1u);
    EXPECT_EQ(rep.spurious[0].freq_hz, 500.0);
}

TEST(Evaluate, EachToneMatchedOnce) {
    hfp::SynthSpec truth;
    truth.rate_hz = 100.0;
    truth.length = 100;
    truth.tones = {{10.0, {1, 0}}, {10.3, {1, 0}}};
    hfp::SparseSpectrum r;
    r.rate_hz = 100.0;
    r.full_length = 100;
    hfp::RecoveredComponent c;
    c.freq_hz = 10.1;
    c.amplitude = 100.0;
    r.components.push_back(c);
    const auto rep = hfp::evaluate(truth, r, 0.5);
    ASSERT_EQ(rep.matched.size(), 1u);
    EXPECT_EQ(rep.matched[0].truth.mu_hz, 10.0);
    EXPECT_EQ(rep.missed.size(), 1u);
    EXPECT_DOUBLE_EQ(rep.recall, 0.5);
    EXPECT_THROW((void)hfp::evaluate(truth, r, 0.0), hfp::Error);
}

TEST(Experiments, FirstWritesEveryPanel) {
    const auto dir = scratch("exp1");
    const auto runs = hfp::run_experiment_1(dir, 30.0, 0, 1);
    ASSERT_EQ(runs.size(), 3u);
    for (int k = 1; k <= 3; ++k) {
        const auto sub = dir / ("signal" + std::to_string(k));
        for (const char* f : {"config.txt", "spectrum.csv", "dense.csv", "eval.csv", "streams.csv", "prony_4.csv"}) {
            EXPECT_TRUE(std::filesystem::exists(sub / f)) << sub / f;
        }
        EXPECT_EQ(runs[static_cast<std::size_t>(k - 1)].eval.recall, 1.0);
    }
    const std::string streams = slurp(dir / "signal1" / "streams.csv");
    EXPECT_EQ(streams.rfind("stream,bin_index,freq_hz,re,im,magnitude\n", 0), 0u);
    EXPECT_EQ(std::count(streams.begin(), streams.end(), '\n'), 1 + 12 * 16);
    EXPECT_NE(slurp(dir / "signal1" / "config.txt").find("samples_used = 192"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Experiments, SecondBudgetLine) {
    const auto dir = scratch("exp2");
    const auto run = hfp::run_experiment_2(dir, 28, std::nullopt, 0, 2);
    const auto b = hfp::budget_line(run.result);
    EXPECT_EQ(b.stream_length, 460u);
    EXPECT_EQ(b.samples_used, 12880u);
    EXPECT_NEAR(b.effective_resolution_hz, 10000.0 / (460.0 * 142.0), 1e-12);
    EXPECT_NEAR(b.dense_same_budget_resolution_hz, 10000.0 / 12880.0, 1e-12);
    EXPECT_EQ(run.eval.recall, 1.0);
    EXPECT_TRUE(std::filesystem::exists(dir / "zoom.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "budget.txt"));
    EXPECT_THROW((void)hfp::run_experiment_2({}, 12, std::nullopt), hfp::Error);
    std::filesystem::remove_all(dir);
}

TEST(Experiments, AmplitudeDraws) {
    const auto spec = hfp::experiment2_signal(std::nullopt, 7);
    ASSERT_EQ(spec.tones.size(), 8u);
    for (const auto& t : spec.tones) {
        EXPECT_GE(std::abs(t.amplitude), 0.5);
        EXPECT_LE(std::abs(t.amplitude), 1.5);
    }
    EXPECT_EQ(spec.length, 65536u);
    EXPECT_EQ(spec.rate_hz, 10000.0);
}
