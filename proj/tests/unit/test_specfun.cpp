#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/specfun.hpp"

using fracwsgl::mittag_leffler;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Gamma, FactorialAndHalfIntegers) {
    EXPECT_DOUBLE_EQ(fracwsgl::gamma(1.0), 1.0);
    EXPECT_NEAR(fracwsgl::gamma(5.0), 24.0, 24.0 * 1e-14);
    EXPECT_NEAR(fracwsgl::gamma(0.5), 1.7724538509055160, 1e-15);
}

// mpmath.gamma at 40 digits.
TEST(Gamma, MatchesHighPrecisionValues) {
    const struct {
        double x, value;
    } cases[] = {
        {-0.5, -3.544907701811032054596},
        {-1.5, 2.363271801207354703064},
        {-2.5, -0.9453087204829418812257},
        {-4.3, -0.1019807888834332109837},
        {0.1, 9.513507698668731836292},
        {7.5, 1871.254305797788346476},
        {25.5, 3.086770540528696782771e24},
        {30.0, 8.841761993739701954544e30},
    };
    for (const auto& c : cases) {
        EXPECT_LT(rel(fracwsgl::gamma(c.x), c.value), 1e-13) << "x = " << c.x;
    }
}

TEST(Gamma, RecurrenceOnRandomArguments) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.1, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = dist(rng);
        EXPECT_LT(rel(fracwsgl::gamma(x + 1.0), x * fracwsgl::gamma(x)), 1e-12) << x;
    }
}

TEST(Gamma, Reflection) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-5.0, 0.0);
    for (int i = 0; i < 500; ++i) {
        const double x = dist(rng);
        if (std::abs(x - std::round(x)) < 1e-3) {
            continue;
        }
        const double v = fracwsgl::gamma(x) * fracwsgl::gamma(1.0 - x) *
                         std::sin(std::numbers::pi * x) / std::numbers::pi;
        EXPECT_NEAR(v, 1.0, 1e-10) << x;
    }
}

TEST(Gamma, PolesAndOverflow) {
    EXPECT_THROW(fracwsgl::gamma(0.0), fracwsgl::PoleError);
    EXPECT_THROW(fracwsgl::gamma(-1.0), fracwsgl::PoleError);
    EXPECT_THROW(fracwsgl::gamma(-7.0), fracwsgl::PoleError);
    EXPECT_THROW(fracwsgl::gamma(172.0), fracwsgl::OverflowError);
    EXPECT_LT(rel(fracwsgl::gamma(170.5), 5.562092414559999610706e305), 1e-11);
}

TEST(MittagLeffler, SpecialValues) {
    EXPECT_EQ(mittag_leffler(0.7, 0.0), 1.0);
    EXPECT_LT(rel(mittag_leffler(1.0, 1.0), 2.718281828459045), 1e-14);
}

// E_{1/2}(z) = exp(z²) erfc(-z); the other values are 40-digit series sums.
TEST(MittagLeffler, MatchesOracles) {
    EXPECT_LT(rel(mittag_leffler(0.5, -1.0), 0.4275835761558070044), 1e-12);
    EXPECT_LT(rel(mittag_leffler(0.5, -0.5), 0.6156903441929258749), 1e-12);
    EXPECT_LT(rel(mittag_leffler(0.5, -1.0), std::exp(1.0) * std::erfc(1.0)), 1e-12);
    EXPECT_LT(rel(mittag_leffler(0.3, -1.0), 0.4565944083296906690), 1e-12);
    EXPECT_LT(rel(mittag_leffler(0.8, 2.0), 13.41574888781901695), 1e-12);
}

TEST(MittagLeffler, OrderOneIsExponential) {
    for (double z = -5.0; z <= 5.0; z += 0.125) {
        EXPECT_LT(rel(mittag_leffler(1.0, z), std::exp(z)), 1e-12) << z;
    }
}

TEST(MittagLeffler, DomainChecks) {
    EXPECT_THROW(mittag_leffler(0.5, 5.5), fracwsgl::DomainError);
    EXPECT_THROW(mittag_leffler(0.5, -6.0), fracwsgl::DomainError);
    EXPECT_THROW(mittag_leffler(0.0, 0.5), fracwsgl::DomainError);
    EXPECT_THROW(mittag_leffler(1.5, 0.5), fracwsgl::DomainError);
    // Cancellation would destroy the 1e-12 guarantee here.
    EXPECT_THROW(mittag_leffler(0.05, -5.0), fracwsgl::DomainError);
}

TEST(MittagLeffler, ExampleRangeIsAccurate) {
    for (double a : {0.05, 0.1, 0.25, 0.5}) {
        for (double z = -1.0; z <= 0.0; z += 0.0625) {
            const double v = mittag_leffler(a, z);
            EXPECT_TRUE(std::isfinite(v));
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}
