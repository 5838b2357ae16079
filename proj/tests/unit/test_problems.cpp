#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fracwsgl/glweights.hpp"
#include "fracwsgl/problems.hpp"

using namespace fracwsgl;
using std::numbers::pi;

TEST(MittagLefflerProblem, ExactSolution) {
    EXPECT_NEAR(problems::two_term_mittag_leffler_exact(0.5, 1.0), 0.80379711223004475, 1e-14);
    EXPECT_DOUBLE_EQ(problems::two_term_mittag_leffler_exact(0.3, 0.0), 1.0);
    const auto p = problems::two_term_mittag_leffler(0.25);
    EXPECT_NO_THROW(p.validate());
    EXPECT_DOUBLE_EQ(p.alphas[0], 0.5);
    EXPECT_DOUBLE_EQ(p.alphas[1], 0.25);
    EXPECT_DOUBLE_EQ(p.rhs(0.3, 2.0), -1.0);
}

TEST(CubicProblem, Data) {
    const auto p = problems::cubic_two_term(0.8, 0.2);
    EXPECT_DOUBLE_EQ(p.T, 10.0);
    EXPECT_DOUBLE_EQ(p.y0, 0.5);
    EXPECT_DOUBLE_EQ(p.rhs(0.0, 0.5), 1.375);
    const double h = 1e-6;
    EXPECT_NEAR(p.rhs_dy(1.0, 0.3), (p.rhs(1.0, 0.3 + h) - p.rhs(1.0, 0.3 - h)) / (2.0 * h), 1e-8);
}

TEST(WaveProblem, SourceMatchesManufacturedSolution) {
    for (double alpha : {0.2, 0.5, 0.9}) {
        const auto p = problems::wave_smooth(alpha);
        for (double t : {0.1, 0.5, 1.0}) {
            // The Caputo and Riemann-Liouville derivatives of t^k agree for k >= 2.
            double frac = 0.0;
            for (int k = 2; k <= 4; ++k) {
                frac += rl_deriv_power(1.0 + alpha, k, t);
            }
            const double poly = 1.0 + t + t * t + t * t * t + t * t * t * t;
            const double dtt = 2.0 + 6.0 * t + 12.0 * t * t;
            for (double x : {-0.7, 0.1, 0.35}) {
                const double expected = std::sin(2.0 * pi * x) * (dtt + frac + 4.0 * pi * pi * poly);
                EXPECT_NEAR(p.source(x, t), expected, 1e-11 * std::abs(expected) + 1e-13);
            }
        }
        EXPECT_NEAR(p.source(0.25, 0.0), 2.0 + 4.0 * pi * pi, 1e-12);
        EXPECT_DOUBLE_EQ(p.phi0(0.25), problems::wave_smooth_exact(0.25, 0.0));
    }
}

TEST(SubdiffusionProblem, Sigmas) {
    const auto s = problems::subdiffusion_sine_sigmas(3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s[0], 0.75);
    EXPECT_DOUBLE_EQ(s[1], 1.0);
    EXPECT_DOUBLE_EQ(s[2], 1.25);
    const auto p = problems::subdiffusion_sine();
    EXPECT_NO_THROW(p.validate());
    EXPECT_DOUBLE_EQ(p.mesh.a(), 0.0);
    EXPECT_DOUBLE_EQ(p.mesh.b(), 1.0);
}
