#include <gtest/gtest.h>

#include <sstream>

#include "hfp/config.hpp"
#include "hfp/io.hpp"

using hfp::cd;

TEST(KeyValues, Parsing) {
    const auto kvs = hfp::parse_key_values("# header\n\n u = 50 \nresolver=bezout # trailing\ntone = 1,2,3\ntone = 4,5,6\n");
    ASSERT_EQ(kvs.size(), 4u);
    EXPECT_EQ(kvs[0].key, "u");
    EXPECT_EQ(kvs[0].value, "50");
    EXPECT_EQ(kvs[0].line, 3u);
    EXPECT_EQ(kvs[1].value, "bezout");
    EXPECT_EQ(kvs[3].value, "4,5,6");
    EXPECT_THROW((void)hfp::parse_key_values("no equals sign\n"), hfp::Error);
    EXPECT_THROW((void)hfp::parse_key_values("= 3\n"), hfp::Error);
}

TEST(KeyValues, Scalars) {
    EXPECT_EQ(hfp::parse_double(" 2.5 "), 2.5);
    EXPECT_THROW((void)hfp::parse_double("2.5x"), hfp::Error);
    EXPECT_THROW((void)hfp::parse_double("inf"), hfp::Error);
    EXPECT_EQ(hfp::parse_size("17"), 17u);
    EXPECT_THROW((void)hfp::parse_size("-1"), hfp::Error);
    EXPECT_TRUE(hfp::parse_bool("on"));
    EXPECT_FALSE(hfp::parse_bool("false"));
    EXPECT_THROW((void)hfp::parse_bool("maybe"), hfp::Error);
}

TEST(HybridConfigText, RoundTrip) {
    hfp::HybridConfig cfg;
    cfg.u = 142;
    cfg.s = 7;
    cfg.M = 28;
    cfg.n = 400;
    cfg.length_policy = hfp::LengthPolicy::Budget;
    cfg.threshold = 0.1 + 0.2; // not exactly representable in short decimal
    cfg.resolver = hfp::Resolver::Bezout;
    cfg.prony = {1e-5, 2, 0.15, 5, 3.0};
    cfg.wrap = true;
    cfg.shortcut_shifted = true;
    cfg.refine_bins = false;
    cfg.merge_tol_hz = 0.07;
    cfg.match_tol_hz = 3.0;
    cfg.ambiguity_factor = 1.5;
    const auto back = hfp::parse_hybrid_config(hfp::parse_key_values(hfp::to_text(cfg)));
    EXPECT_EQ(back.u, 142u);
    EXPECT_EQ(back.M, 28u);
    EXPECT_EQ(back.n, 400u);
    EXPECT_EQ(back.length_policy, hfp::LengthPolicy::Budget);
    EXPECT_EQ(back.threshold, cfg.threshold);
    EXPECT_EQ(back.resolver, hfp::Resolver::Bezout);
    EXPECT_EQ(back.prony.sigma_rel_tol, 1e-5);
    EXPECT_EQ(back.prony.extra_terms, 2u);
    EXPECT_EQ(back.prony.delta, 0.15);
    EXPECT_EQ(back.prony.M_rows, 5u);
    EXPECT_EQ(back.prony.noise_gate, 3.0);
    EXPECT_TRUE(back.wrap);
    EXPECT_TRUE(back.shortcut_shifted);
    EXPECT_FALSE(back.refine_bins);
    EXPECT_EQ(back.merge_tol_hz, 0.07);
    EXPECT_EQ(back.match_tol_hz, 3.0);
    EXPECT_EQ(back.ambiguity_factor, 1.5);
    EXPECT_THROW((void)hfp::parse_hybrid_config(hfp::parse_key_values("speed = 3\n")), hfp::Error);
    EXPECT_THROW((void)hfp::parse_hybrid_config(hfp::parse_key_values("resolver = crt\n")), hfp::Error);
}

TEST(SignalIo, CsvRoundTripIsExact) {
    const hfp::ComplexSignal x{{cd(0.1, -2.5e-300), cd(1.0 / 3.0, 7.0), cd(-0.0, 1e10)}, 5.0, 0};
    std::stringstream ss;
    hfp::write_signal_csv(ss, x);
    const auto back = hfp::read_signal_csv(ss);
    EXPECT_EQ(back, x.samples);
}

TEST(SignalIo, Raw64RoundTripIsExactAndLittleEndian) {
    const hfp::ComplexSignal x{{cd(1.0, -2.0), cd(1.0 / 3.0, 1e-310)}, 5.0, 0};
    std::stringstream ss;
    hfp::write_signal_raw64(ss, x);
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 32u);
    // 1.0 is 0x3FF0000000000000: high byte last
    EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 0x3F);
    EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 0xF0);
    EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x00);
    std::stringstream in(bytes);
    EXPECT_EQ(hfp::read_signal_raw64(in), x.samples);
}

TEST(SignalIo, MalformedInputs) {
    auto csv = [](const std::string& text) {
        std::istringstream in(text);
        return hfp::read_signal_csv(in);
    };
    EXPECT_THROW((void)csv(""), hfp::Error);
    EXPECT_THROW((void)csv("x,y\n1,2\n"), hfp::Error);
    EXPECT_THROW((void)csv("re,im\n1\n"), hfp::Error);
    EXPECT_THROW((void)csv("re,im\n1,2,3\n"), hfp::Error);
    EXPECT_THROW((void)csv("re,im\n1,nan\n"), hfp::Error);
    EXPECT_EQ(csv("re,im\n\n1,2\n").size(), 1u);
    std::istringstream odd(std::string(17, '\0'));
    EXPECT_THROW((void)hfp::read_signal_raw64(odd), hfp::Error);
    EXPECT_THROW((void)hfp::read_signal("/nonexistent/file.csv", 1.0, hfp::SignalFormat::Csv), hfp::Error);
    EXPECT_THROW((void)hfp::parse_signal_format("wav"), hfp::Error);
}

TEST(SpectrumIo, Columns) {
    std::stringstream ss;
    hfp::write_spectrum_csv(ss, hfp::Spectrum{{cd(3, 4), cd(0, 0)}, 0.5});
    EXPECT_EQ(ss.str(), "bin_index,freq_hz,re,im,magnitude\n0,0,3,4,5\n1,0.5,0,0,0\n");
}

TEST(ErrorFamilies, ExitCodeSplit) {
    EXPECT_EQ(hfp::family_of(hfp::ErrorCode::NotCoprime), hfp::ErrorFamily::Data);
    EXPECT_EQ(hfp::family_of(hfp::ErrorCode::ParseError), hfp::ErrorFamily::Data);
    EXPECT_EQ(hfp::family_of(hfp::ErrorCode::NoConvergence), hfp::ErrorFamily::Numerical);
    EXPECT_EQ(hfp::family_of(hfp::ErrorCode::IllConditionedVandermonde), hfp::ErrorFamily::Numerical);
}
