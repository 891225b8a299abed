#include "vcrown/certified.hpp"

#include "decimal_oracle.hpp"
#include "vcrown/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vcrown;

namespace {

constexpr double kK3Min = -0.6804790632423977484683617;

struct Case {
    std::vector<double> c;
    ScoreBox box;
};

Case random_case(Rng& rng, std::size_t k, double scale)
{
    std::vector<double> c(k), lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
        c[j] = rng.normal();
        const double a = rng.uniform(-scale, scale), b = rng.uniform(-scale, scale);
        lo[j] = std::min(a, b);
        hi[j] = std::max(a, b);
    }
    return {c, ScoreBox(lo, hi)};
}

} // namespace

TEST(Certified, DegenerateBox)
{
    const std::vector<double> c{0, 1};
    const CertifiedBound b = certified_directional_min(c, ScoreBox({0, 0}, {0, 0}));
    EXPECT_LE(b.lower, 0.5);
    EXPECT_GE(b.lower, 0.5 - 1e-9);
    EXPECT_FALSE(b.saturated);
}

TEST(Certified, ThreeTokenExample)
{
    const std::vector<double> c{-1, 0, 1};
    const CertifiedBound b = certified_directional_min(c, ScoreBox({-1, -1, -1}, {1, 1, 1}));
    EXPECT_LE(b.lower, kK3Min);
    EXPECT_GE(b.lower, kK3Min - 1e-6);
    EXPECT_NEAR(b.float_value, kK3Min, 1e-15);
}

TEST(Certified, WideDynamicRange)
{
    const std::vector<double> c{1, 0};
    const CertifiedBound b = certified_directional_min(c, ScoreBox({-700, 0}, {-690, 0}));
    const oracle::Dec exact = oracle::vertex_min(c, std::vector<double>{-700, 0},
                                                 std::vector<double>{-690, 0});
    EXPECT_FALSE(b.saturated);
    EXPECT_TRUE(std::isfinite(b.lower));
    EXPECT_GE(b.lower, 0.0);
    EXPECT_LE(b.lower, oracle::enclose(exact).hi);
    EXPECT_LE(oracle::Dec(b.lower), exact);
}

TEST(Certified, UnderflowFallsBackToDirectionRange)
{
    // Every lower exponential underflows after the shift.
    const std::vector<double> c{2, -1, 0.5};
    const CertifiedBound b =
        certified_directional_min(c, ScoreBox({-1e6, -1e6, -1e6}, {0, 0, 0}));
    EXPECT_FALSE(b.saturated);
    EXPECT_GE(b.lower, -1.0 - 1e-12);
    EXPECT_LE(b.lower, b.float_value);
}

TEST(Certified, SaturatesOnOverflowingShift)
{
    const std::vector<double> c{1, 0};
    const CertifiedBound b = certified_directional_min(c, ScoreBox({-1e308, 0}, {1e308, 0}));
    EXPECT_TRUE(b.saturated);
}

TEST(CertifiedProperty, Conservatism)
{
    Rng rng(31);
    for (int n = 0; n < 10000; ++n) {
        const Case cs = random_case(rng, 1 + n % 16, 20.0);
        const CertifiedBound b = certified_directional_min(cs.c, cs.box);
        ASSERT_FALSE(b.saturated);
        ASSERT_LE(b.lower, b.float_value) << "trial " << n;
        std::vector<double> s(cs.c.size());
        for (int m = 0; m < 100; ++m) {
            for (std::size_t j = 0; j < s.size(); ++j)
                s[j] = rng.uniform(cs.box.lower(j), cs.box.upper(j));
            ASSERT_LE(b.lower, softmax_objective(cs.c, s)) << "trial " << n;
        }
    }
}

TEST(CertifiedProperty, BelowDecimalMinimum)
{
    Rng rng(32);
    for (int n = 0; n < 500; ++n) {
        const Case cs = random_case(rng, 1 + n % 8, n % 2 ? 5.0 : 300.0);
        const CertifiedBound b = certified_directional_min(cs.c, cs.box);
        const oracle::Dec exact = oracle::vertex_min(cs.c, cs.box.lower(), cs.box.upper());
        ASSERT_LE(oracle::Dec(b.lower), exact) << "trial " << n;
    }
}

TEST(CertifiedProperty, Tightness)
{
    Rng rng(33);
    for (int n = 0; n < 10000; ++n) {
        const Case cs = random_case(rng, 1 + n % 64, 50.0);
        const CertifiedBound b = certified_directional_min(cs.c, cs.box);
        ASSERT_GE(b.lower, b.float_value - 1e-6) << "trial " << n;
        ASSERT_LE(b.lower, b.float_value + 1e-9);
    }
}
