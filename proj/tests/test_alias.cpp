#include <gtest/gtest.h>

#include <cstdlib>
#include <numeric>

#include "hfp/alias.hpp"
#include "oracles.hpp"

namespace {

hfp::Generator gen_at(double f, std::size_t step, double R) { return hfp::Generator::from_frequency(f, step, R); }

} // namespace

TEST(CandidateSet, QuarterTurnRoots) {
    const hfp::Generator g{std::polar(1.0, 2.0 * std::numbers::pi * 0.75), 4};
    const auto set = hfp::candidate_set(g, 1000.0);
    const std::vector<double> expect{187.5, 437.5, 687.5, 937.5};
    ASSERT_EQ(set.candidates.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(set.candidates[k], expect[k], 1e-9);
}

TEST(CandidateSet, UnitGenerator) {
    const auto set = hfp::candidate_set(hfp::Generator{{1.0, 0.0}, 3}, 9.0);
    EXPECT_EQ(set.candidates, (std::vector<double>{0.0, 3.0, 6.0}));
}

TEST(CandidateSet, FiveHertzBinHoldsTheCollidingTones) {
    const auto set = hfp::candidate_set(gen_at(5.0, 50, 1000.0), 1000.0);
    ASSERT_EQ(set.candidates.size(), 50u);
    for (std::size_t k = 0; k < 50; ++k) EXPECT_NEAR(set.candidates[k], 5.0 + 20.0 * static_cast<double>(k), 1e-9);
    for (double f : {125.0, 165.0, 245.0}) {
        const bool hit = std::any_of(set.candidates.begin(), set.candidates.end(), [&](double c) { return std::abs(c - f) < 1e-9; });
        EXPECT_TRUE(hit) << f;
    }
}

TEST(CandidateSet, DegenerateGenerator) {
    try {
        (void)hfp::candidate_set(hfp::Generator{{1e-13, 0.0}, 5}, 100.0);
        FAIL();
    } catch (const hfp::Error& e) {
        EXPECT_EQ(e.code(), hfp::ErrorCode::DegenerateGenerator);
    }
    // the modulus does not matter otherwise
    const auto set = hfp::candidate_set(hfp::Generator{{0.0, 3.0}, 1}, 100.0);
    EXPECT_NEAR(set.candidates[0], 25.0, 1e-12);
}

TEST(Bezout, KnownPairs) {
    const auto a = hfp::bezout(50, 17);
    EXPECT_EQ(a.t, -1);
    EXPECT_EQ(a.v, 3);
    EXPECT_EQ(a.amplification(), 4);
    const auto b = hfp::bezout(2, 1);
    EXPECT_EQ(b.t, 0);
    EXPECT_EQ(b.v, 1);
}

TEST(Bezout, MinimalOverTheWholeFamily) {
    for (auto [u, s] : std::vector<std::pair<long long, long long>>{{142, 7}, {50, 17}, {4, 3}, {250, 3}, {7, 142}, {1, 1}}) {
        const auto bp = hfp::bezout(static_cast<std::size_t>(u), static_cast<std::size_t>(s));
        EXPECT_EQ(u * bp.t + s * bp.v, 1);
        // any particular solution, then scan t = t0 + s k
        long long t0 = 0;
        while ((1 - u * t0) % s != 0) ++t0;
        long long best = -1;
        for (long long k = -200; k <= 200; ++k) {
            const long long t = t0 + s * k;
            const long long v = (1 - u * t) / s;
            const long long m = std::max(std::llabs(t), std::llabs(v));
            if (best < 0 || m < best) best = m;
        }
        EXPECT_EQ(std::max(std::llabs(bp.t), std::llabs(bp.v)), best) << u << "," << s;
    }
}

TEST(Bezout, RejectsNonCoprime) {
    try {
        (void)hfp::bezout(4, 2);
        FAIL();
    } catch (const hfp::Error& e) {
        EXPECT_EQ(e.code(), hfp::ErrorCode::NotCoprime);
    }
}

TEST(ResolveBezout, ClosedForm) {
    const auto bp = hfp::bezout(50, 17);
    for (double f : {125.0, 245.0, 0.0, 999.0}) {
        const auto r = hfp::resolve_bezout(gen_at(f, 50, 1000.0), gen_at(f, 17, 1000.0), bp, 1000.0);
        EXPECT_NEAR(r.freq_hz, f, 1e-9);
        EXPECT_EQ(r.noise_amplification, 4);
    }
    const auto z = hfp::resolve_bezout(hfp::Generator{{1, 0}, 50}, hfp::Generator{{1, 0}, 17}, bp, 1000.0);
    EXPECT_NEAR(z.freq_hz, 0.0, 1e-12);
}

TEST(ResolveBezout, StepMismatch) {
    EXPECT_THROW((void)hfp::resolve_bezout(gen_at(1, 17, 100), gen_at(1, 50, 100), hfp::bezout(50, 17), 100.0), hfp::Error);
}

TEST(ResolveMatch, SingleIntersection) {
    const double R = 1000.0;
    const auto U = hfp::candidate_set(gen_at(125.0, 50, R), R);
    const auto S = hfp::candidate_set(gen_at(125.0, 17, R), R);
    // brute-force the 50 x 17 distance matrix for the reference answer
    double best = 1e300;
    double at = 0.0;
    for (double fu : U.candidates) {
        for (double fs : S.candidates) {
            const double d = std::min(std::abs(fu - fs), R - std::abs(fu - fs));
            if (d < best) {
                best = d;
                at = fs;
            }
        }
    }
    const auto m = hfp::resolve_match(U, S);
    EXPECT_NEAR(m.freq_hz, 125.0, 1e-9);
    EXPECT_NEAR(m.freq_hz, at, 1e-12);
    EXPECT_NEAR(m.match_distance_hz, 0.0, 1e-9);
}

TEST(ResolveMatch, CoprimeGridIsUnique) {
    const double N = 60.0;
    for (int f = 0; f < 60; ++f) {
        const auto U = hfp::candidate_set(gen_at(f, 4, N), N);
        const auto S = hfp::candidate_set(gen_at(f, 3, N), N);
        const auto m = hfp::resolve_match(U, S);
        EXPECT_NEAR(m.freq_hz, f, 1e-9);
    }
}

TEST(ResolveMatch, Errors) {
    const double R = 60.0;
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const hfp::Error& e) {
            return e.code();
        }
        return hfp::ErrorCode::ParseError;
    };
    EXPECT_EQ(code([&] { (void)hfp::resolve_match(hfp::candidate_set(gen_at(5, 4, R), R), hfp::candidate_set(gen_at(5, 2, R), R)); }),
              hfp::ErrorCode::NotCoprime);
    // U and S from different tones: nothing lines up within a tight tolerance
    EXPECT_EQ(code([&] {
                  (void)hfp::resolve_match(hfp::candidate_set(gen_at(5.0, 4, R), R), hfp::candidate_set(gen_at(5.4, 3, R), R), {0.1, 2.0, 1.0});
              }),
              hfp::ErrorCode::NoIntersection);
    // exact midpoint between two S candidates: two equally good matches
    EXPECT_EQ(code([&] {
                  (void)hfp::resolve_match(hfp::candidate_set(gen_at(5.0, 2, R), R), hfp::candidate_set(gen_at(10.0, 3, R), R), {-1.0, 2.0, 1.0});
              }),
              hfp::ErrorCode::NoUniqueIntersection);
}

TEST(Circular, DistanceAndOffset) {
    EXPECT_NEAR(hfp::circular_distance(999.0, 1.0, 1000.0), 2.0, 1e-12);
    EXPECT_NEAR(hfp::detail::circular_offset(999.0, 1.0, 1000.0), 2.0, 1e-12);
    EXPECT_NEAR(hfp::detail::circular_offset(1.0, 999.0, 1000.0), -2.0, 1e-12);
    EXPECT_NEAR(hfp::detail::wrap_hz(-1.0, 1000.0), 999.0, 1e-12);
}

TEST(BezoutBound, ScalesWithTheAmplification) {
    const auto bp = hfp::bezout(50, 17);
    EXPECT_NEAR(hfp::bezout_error_bound(bp, 1e-4, 1e-4, 1000.0), 4e-4 * 1000.0 / (2.0 * std::numbers::pi), 1e-15);
}
