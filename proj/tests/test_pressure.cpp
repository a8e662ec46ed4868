#include <gtest/gtest.h>

#include <cmath>

#include "cifs/pressure.hpp"
#include "support.hpp"

using namespace cifs;
using cifs::testing::bundled;
using cifs::testing::gauss_system;
using cifs::testing::interval_system;
using cifs::testing::random_osc_interval_system;

namespace {

const double log2_log3 = std::log(2.0) / std::log(3.0);

// Independent depth-16 cylinder-sum oracle, bisection on (1/n) log sum,
// computed offline and frozen here.
constexpr double gauss_12 = 0.5312805057767065;
constexpr double gauss_123 = 0.7056609066581279;
constexpr double gauss_1234 = 0.7889456962349757;

gdms cantor() { return interval_system({1.0 / 3.0, 1.0 / 3.0}, {0.0, 2.0 / 3.0}); }

}  // namespace

TEST(Pressure, CantorExactValues) {
    pressure_engine e(cantor());
    for (std::size_t n : {1u, 3u, 7u}) {
        const auto p0 = e.evaluate(0.0, n);
        EXPECT_NEAR(p0.lower, std::log(2.0), 1e-14);
        EXPECT_NEAR(p0.upper, std::log(2.0), 1e-14);
        const auto pd = e.evaluate(log2_log3, n);
        EXPECT_NEAR(pd.lower, 0.0, 1e-12);
        EXPECT_NEAR(pd.upper, 0.0, 1e-12);
    }
}

TEST(Pressure, GaussEnclosureShrinks) {
    pressure_engine e(gauss_system({1, 2}));
    double previous = INFINITY;
    for (std::size_t n : {6u, 8u, 10u}) {
        const auto p = e.evaluate(0.5, n);
        EXPECT_LE(p.lower, p.upper);
        EXPECT_LE(p.width(), previous + 1e-15);
        previous = p.width();
    }
    EXPECT_LT(previous, 0.05);
}

TEST(Pressure, DepthDoublingNeverWidens) {
    pressure_engine e(gauss_system({1, 2, 3}));
    for (double t : {0.3, 0.7, 1.2}) {
        for (std::size_t n : {1u, 2u, 3u, 4u}) {
            EXPECT_LE(e.evaluate(t, 2 * n).width(), e.evaluate(t, n).width() + 1e-12) << "t=" << t << " n=" << n;
        }
    }
}

TEST(Pressure, UpperBoundDecreasesInT) {
    pressure_engine e(bundled("gauss"));
    double last = INFINITY;
    for (int k = 0; k <= 20; ++k) {
        const double up = e.evaluate(0.1 * k, 4).upper;
        EXPECT_LT(up, last);
        last = up;
    }
}

TEST(Bowen, ClosedFormCases) {
    const auto c = bowen_root(cantor());
    EXPECT_NEAR(c.value, log2_log3, 1e-8);
    EXPECT_TRUE(c.resolved);
    EXPECT_LE(c.lo, log2_log3 + 1e-12);
    EXPECT_GE(c.hi, log2_log3 - 1e-12);
    const auto halves = bowen_root(interval_system({0.5, 0.5}, {0.0, 0.5}));
    EXPECT_NEAR(halves.value, 1.0, 1e-8);
}

TEST(Bowen, GaussPairMatchesOracle) {
    bowen_options opt;
    opt.tol = 1e-5;
    opt.max_depth = 16;
    const auto d = bowen_root(gauss_system({1, 2}), opt);
    EXPECT_NEAR(d.value, gauss_12, 1e-3);
    EXPECT_LE(d.lo, gauss_12 + 1e-9);
    EXPECT_GE(d.hi, gauss_12 - 1e-9);
}

TEST(Bowen, RangeAndUnresolvedFlag) {
    bowen_options opt;
    opt.tol = 1e-14;
    opt.max_depth = 3;
    const auto d = bowen_root(gauss_system({1, 2}), opt);
    EXPECT_FALSE(d.resolved);
    EXPECT_GE(d.lo, 0.0);
    EXPECT_LE(d.hi, 1.0);
}

TEST(Moran, Examples) {
    EXPECT_NEAR(moran_dimension({1.0 / 3.0, 1.0 / 3.0}).value, log2_log3, 1e-13);
    EXPECT_NEAR(moran_dimension({0.5, 0.5}).value, 1.0, 1e-13);
    EXPECT_EQ(moran_dimension({0.5}).value, 0.0);
    EXPECT_THROW(moran_dimension({1.5}), std::invalid_argument);
}

TEST(Moran, AgreesWithBowenOnRandomSystems) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto sys = random_osc_interval_system(seed, 2 + seed % 4, 0.1, 0.45);
        std::vector<double> ratios;
        for (const auto& m : sys.maps) {
            ratios.push_back(std::get<similarity>(m).ratio);
        }
        const auto b = bowen_root(sys);
        EXPECT_LE(std::abs(b.value - moran_dimension(ratios).value), 1e-8 + b.width()) << "seed " << seed;
    }
}

TEST(Filtration, GaussLevelsIncrease) {
    auto sys = bundled("gauss");
    sys.filtration.resize(3);
    bowen_options opt;
    opt.tol = 1e-5;
    opt.max_depth = 14;
    const auto r = dimension_infinite(sys, 10, opt);
    ASSERT_EQ(r.levels.size(), 3u);
    EXPECT_NEAR(r.levels[0].value, 0.0, 1e-9);
    EXPECT_NEAR(r.levels[1].value, gauss_12, 1e-3);
    EXPECT_NEAR(r.levels[2].value, gauss_123, 1e-3);
    EXPECT_TRUE(r.monotone);
    EXPECT_LT(r.levels[0].value, r.levels[1].value);
    EXPECT_LT(r.levels[1].value, r.levels[2].value);
    EXPECT_DOUBLE_EQ(r.supremum.value, r.levels[2].value);
}

TEST(Filtration, IdenticalSetsGiveConstantList) {
    auto sys = bundled("gauss");
    sys.filtration = {{0, 1}, {0, 1}, {0, 1}};
    bowen_options opt;
    opt.tol = 1e-4;
    opt.max_depth = 10;
    const auto r = dimension_infinite(sys, 10, opt);
    EXPECT_EQ(r.levels[0].value, r.levels[1].value);
    EXPECT_EQ(r.levels[1].value, r.levels[2].value);
}

TEST(Filtration, CantorTrivialFiltration) {
    auto sys = cantor();
    sys.filtration = {{0}, {0, 1}};
    const auto r = dimension_infinite(sys, 2);
    EXPECT_NEAR(r.levels[0].value, 0.0, 1e-12);
    EXPECT_NEAR(r.levels[1].value, log2_log3, 1e-8);
    EXPECT_THROW(dimension_infinite(cantor(), 2), std::invalid_argument);
}

TEST(Filtration, BudgetLimitsLevels) {
    auto sys = bundled("gauss");
    bowen_options opt;
    opt.tol = 1e-3;
    opt.max_depth = 6;
    EXPECT_EQ(dimension_infinite(sys, 2, opt).levels.size(), 2u);
}

TEST(Subsystems, DimensionIsMonotone) {
    bowen_options opt;
    opt.tol = 1e-4;
    opt.max_depth = 12;
    const auto small = bowen_root(gauss_system({2, 3}), opt);
    const auto large = bowen_root(gauss_system({1, 2, 3}), opt);
    EXPECT_LE(small.value, large.value + 2 * opt.tol);
    const auto d4 = bowen_root(gauss_system({1, 2, 3, 4}), opt);
    EXPECT_NEAR(d4.value, gauss_1234, 1e-3);
}

TEST(PressureBounds, CantorShiftIsExact) {
    pressure_engine e(cantor());
    for (double t : {0.0, 0.4, 1.0}) {
        for (double u : {0.0, 0.3, 1.7}) {
            const auto r = pressure_bounds_check(e, t, u, 3);
            EXPECT_TRUE(r.holds);
            EXPECT_TRUE(r.exact);
            EXPECT_NEAR(r.at_t_plus_u.upper, r.at_t.upper - u * std::log(3.0), 1e-12);
        }
    }
}

TEST(PressureBounds, RandomSimilaritySystem) {
    const auto sys = interval_system({0.2, 0.3, 0.25}, {0.0, 0.35, 0.7});
    pressure_engine e(sys);
    for (std::size_t k = 0; k < 100; ++k) {
        auto rng = indexed_rng(9, k);
        const double t = 2.0 * uniform01(rng);
        const double u = 2.0 * uniform01(rng);
        EXPECT_TRUE(pressure_bounds_check(e, t, u, 4).holds) << t << " " << u;
    }
}

TEST(PressureBounds, ThreadCountDoesNotChangeValues) {
    pressure_options one;
    pressure_options four;
    four.threads = 4;
    pressure_engine a(bundled("gauss"), one);
    pressure_engine b(bundled("gauss"), four);
    for (double t : {0.2, 0.8}) {
        const auto pa = a.evaluate(t, 6);
        const auto pb = b.evaluate(t, 6);
        EXPECT_EQ(pa.lower, pb.lower);
        EXPECT_EQ(pa.upper, pb.upper);
    }
}
