#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fracwsgl/corrections.hpp"
#include "fracwsgl/errors.hpp"
#include "fracwsgl/specfun.hpp"

using namespace fracwsgl;

TEST(CorrectionSet, Validation) {
    EXPECT_THROW(CorrectionSet({0.5, 0.5}), InvalidParameter);
    EXPECT_THROW(CorrectionSet({0.5, 0.4}), InvalidParameter);
    EXPECT_THROW(CorrectionSet({0.0}), InvalidParameter);
    EXPECT_THROW(CorrectionSet::linear(11, 0.1), InvalidParameter);
    const auto s = CorrectionSet::linear(3, 0.1, 1.0, 0.05);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s[0], 0.25);
    EXPECT_DOUBLE_EQ(s[2], 0.45);
    EXPECT_EQ(s.prefix(2).size(), 2u);
    EXPECT_THROW(s.prefix(4), InvalidParameter);
}

TEST(StartingWeights, SingleUnknown) {
    const WSGLWeightTable g(0.5, 4);
    const auto w = starting_weights_fractional(0.5, CorrectionSet({0.5}), g, 1);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NEAR(w[0], 0.8862269254527580 - 1.25, 1e-14);
}

TEST(StartingWeights, OrderOneDecay) {
    for (double sigma : {0.3, 0.5, 0.8}) {
        const CorrectionSet set({sigma});
        const WSGLWeightTable g(1.0, 256);
        const auto table = StartingWeights::fractional(1.0, set, g, 256);
        double cmin = 1e300, cmax = 0.0;
        for (std::size_t n = 8; n <= 256; n *= 2) {
            const double c = std::abs(table.row(n)[0]) / std::pow(double(n), sigma - 3.0);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        EXPECT_GT(cmin, 0.0);
        EXPECT_LT(cmax / cmin, 2.0) << sigma;
    }
}

TEST(StartingWeights, DecayRate) {
    const double a = 0.5;
    const CorrectionSet set = CorrectionSet::linear(3, a, 1.0);
    const WSGLWeightTable g(a, 256);
    const auto table = StartingWeights::fractional(a, set, g, 256);
    for (std::size_t r = 0; r < 3; ++r) {
        double cmin = 1e300, cmax = 0.0;
        for (std::size_t n = 16; n <= 256; n *= 2) {
            double bound = 0.0;
            for (double s : set.sigmas()) bound += std::pow(double(n), s - 2.0 - a);
            const double c = std::abs(table.row(n)[r]) / bound;
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        EXPECT_LT(cmax / cmin, 2.0) << "r = " << r;
    }
}

TEST(StartingWeights, FirstDerivativeExactCases) {
    for (std::size_t n : {1u, 4u, 50u}) {
        EXPECT_NEAR(starting_weights_d1_u(CorrectionSet({2.0}), 1, n)[0], 0.0, 1e-12);
        EXPECT_NEAR(starting_weights_d1_u(CorrectionSet({1.0}), 1, n)[0], 0.0, 1e-12);
        EXPECT_NEAR(starting_weights_d1_v(CorrectionSet({3.0}), 1, n)[0], 0.0, 1e-12);
        EXPECT_NEAR(starting_weights_d1_v(CorrectionSet({2.0}), 1, n)[0], 0.0, 1e-12);
    }
    // 1.25 (5^1.5 + 4^1.5) - (5^2.5 - 4^2.5) by mpmath.
    EXPECT_NEAR(starting_weights_d1_u(CorrectionSet({2.5}), 1, 4)[0], 0.07372542187894319, 1e-13);
    EXPECT_NEAR(starting_weights_d1_v(CorrectionSet({3.5}), 1, 4)[0], 0.07372542187894319, 1e-13);
    EXPECT_TRUE(starting_weights_d1_u(CorrectionSet({2.5}), 0, 4).empty());
    EXPECT_THROW(starting_weights_d1_v(CorrectionSet({0.5}), 1, 4), InvalidParameter);
}

TEST(CorrectedOperator, ExactOnCorrectionExponents) {
    for (double a : {0.3, 0.5, 0.8}) {
        for (std::size_t m : {1u, 4u, 8u}) {
            const CorrectionSet set = CorrectionSet::linear(m, a);
            const double tau = 1.0 / 32;
            for (double s : set.sigmas()) {
                const auto path = SampledPath::sample([s](double t) { return std::pow(t, s); }, tau, 32);
                const CorrectedWsglOperator op(a, tau, 32, set);
                for (std::size_t n = 1; n <= 32; ++n) {
                    const double v = op.apply(std::span<const double>(path.values), n, 0.0);
                    const double exact = rl_deriv_power(a, s, path.time(n));
                    EXPECT_NEAR(v, exact, 1e-9) << "alpha " << a << " m " << m << " n " << n;
                }
            }
        }
    }
}

TEST(CorrectedOperator, ResidualWithinDiagnostic) {
    const double a = 0.4;
    const CorrectionSet set = CorrectionSet::linear(5, a);
    const double tau = 0.02;
    const auto diag = vandermonde_diagnostics(a, set);
    for (double s : set.sigmas()) {
        const auto path = SampledPath::sample([s](double t) { return std::pow(t, s); }, tau, 100);
        for (std::size_t n = 1; n <= 100; n += 9) {
            const double v = corrected_wsgl_apply(path, a, set, n);
            const double exact = rl_deriv_power(a, s, path.time(n));
            EXPECT_LE(std::abs(v - exact), 4.0 * diag.max_residual * std::pow(tau, -a) + 1e-12);
        }
    }
}

TEST(CorrectedOperator, EmptySetIsWsgl) {
    const auto path = SampledPath::sample([](double t) { return std::sqrt(t) + t; }, 0.05, 40);
    for (std::size_t n : {1u, 7u, 40u}) {
        EXPECT_NEAR(corrected_wsgl_apply(path, 0.6, CorrectionSet(), n),
                    apply_wsgl_pair(path, 0.6, 0, -1, n), 1e-12);
    }
}

TEST(CorrectedOperator, PowerExampleSmallAlpha) {
    const double a = 0.05;
    const double tau = 1e-3;
    const std::size_t steps = 1000;
    const auto path = SampledPath::sample([a](double t) { return std::pow(t, 8 * a); }, tau, steps);
    auto worst = [&](std::size_t m) {
        const CorrectedWsglOperator op(a, tau, steps, CorrectionSet::linear(m, a));
        double e = 0.0;
        for (std::size_t n = 200; n <= steps; ++n) {
            e = std::max(e, std::abs(op.apply(std::span<const double>(path.values), n, 0.0) -
                                     rl_deriv_power(a, 8 * a, path.time(n))));
        }
        return e;
    };
    EXPECT_LE(worst(6), 1e-7);
    // Smaller S_m^σ gives a smaller error.
    double prev = worst(1);
    for (std::size_t m : {3u, 5u, 6u, 7u}) {
        const double e = worst(m);
        EXPECT_LT(e, prev) << "m = " << m;
        prev = e;
    }
}

TEST(Diagnostics, TableValues) {
    const auto d = vandermonde_diagnostics(0.1, CorrectionSet::linear(3, 0.1));
    EXPECT_GT(d.condition_number, 3.20e3 / 3.0);
    EXPECT_LT(d.condition_number, 3.20e3 * 3.0);
    EXPECT_LE(vandermonde_diagnostics(0.3, CorrectionSet::linear(3, 0.3)).max_residual, 1e-13);
    EXPECT_DOUBLE_EQ(vandermonde_diagnostics(0.3, CorrectionSet({0.3})).condition_number, 1.0);
    EXPECT_THROW(vandermonde_diagnostics(0.3, CorrectionSet()), InvalidParameter);
}

TEST(Diagnostics, ConditionGrowsWithM) {
    for (double a : {0.05, 0.1, 0.3}) {
        double prev = 0.0;
        for (std::size_t m = 1; m <= 8; ++m) {
            const double c = vandermonde_diagnostics(a, CorrectionSet::linear(m, a)).condition_number;
            EXPECT_GE(c, prev);
            prev = c;
        }
    }
}

TEST(SFactor, Values) {
    EXPECT_NEAR(s_factor(0.8, CorrectionSet::linear(3, 0.1)), 0.21, 1e-15);
    EXPECT_EQ(s_factor(0.3, CorrectionSet({0.1, 0.3})), 0.0);
    EXPECT_EQ(s_factor(0.3, CorrectionSet()), 1.0);
}

TEST(StartingWeights, TableAccessors) {
    const WSGLWeightTable g(0.5, 10);
    const auto t = StartingWeights::fractional(0.5, CorrectionSet::linear(2, 0.5), g, 10);
    EXPECT_EQ(t.kind(), StartingWeightKind::fractional);
    EXPECT_EQ(t.m(), 2u);
    EXPECT_FALSE(t.ill_conditioned());
    EXPECT_THROW(t.row(11), IndexRangeError);
    EXPECT_THROW(StartingWeights::fractional(0.5, CorrectionSet::linear(2, 0.5), g, 11), InvalidParameter);
}
