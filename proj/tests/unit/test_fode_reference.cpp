#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fracwsgl/fode.hpp"
#include "fracwsgl/problems.hpp"

using namespace fracwsgl;

// Two independent fine-grid solutions of the cubic problem, α1 = 0.2, α2 = 0.1.
class FineReference : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        const auto p = problems::cubic_two_term(0.2, 0.1);
        SolverConfig cfg;
        cfg.tau = p.T / (1 << 17);
        trapezoid_ = new SampledPath(solve_trapezoidal(p, cfg));
        l1_ = new SampledPath(solve_l1(p, cfg));
    }
    static void TearDownTestSuite() {
        delete trapezoid_;
        delete l1_;
    }
    static double max_difference(double from) {
        double worst = 0.0;
        for (std::size_t n = 0; n < l1_->values.size(); ++n) {
            if (l1_->time(n) >= from) {
                worst = std::max(worst, std::abs(l1_->values[n] - trapezoid_->values[n]));
            }
        }
        return worst;
    }
    static SampledPath* trapezoid_;
    static SampledPath* l1_;
};

SampledPath* FineReference::trapezoid_ = nullptr;
SampledPath* FineReference::l1_ = nullptr;

TEST_F(FineReference, AgreePointwise) { EXPECT_LE(max_difference(0.0), 1e-6); }

TEST_F(FineReference, AgreeAtFinalTime) {
    EXPECT_LE(std::abs(l1_->values.back() - trapezoid_->values.back()), 1e-6);
    EXPECT_LE(max_difference(5.0), 1e-6);
}
