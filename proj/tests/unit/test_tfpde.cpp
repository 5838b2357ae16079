#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/problems.hpp"
#include "fracwsgl/specfun.hpp"
#include "fracwsgl/tfpde.hpp"

using namespace fracwsgl;
using std::numbers::pi;

namespace {

double max_abs(const FieldHistory& h) {
    double m = 0.0;
    for (const auto& u : h.u) {
        m = std::max(m, u.cwiseAbs().maxCoeff());
    }
    for (const auto& v : h.v) {
        m = std::max(m, v.cwiseAbs().maxCoeff());
    }
    return m;
}

double smooth_final_error(double alpha, std::size_t m3, double tau) {
    const auto p = problems::wave_smooth(alpha);
    WaveCorrections c;
    c.sigmas = problems::wave_smooth_sigmas();
    c.m3 = m3;
    const auto h = solve_wave(p, tau, c);
    return l2_error(h, p.mesh, h.steps(), problems::wave_smooth_exact);
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

WaveCorrections input_corrections(std::size_t m) {
    WaveCorrections c;
    c.sigmas = problems::wave_smooth_input_sigmas();
    c.m1 = c.m2 = c.m3 = m;
    return c;
}

double input_final_error(std::size_t m, double tau, const FieldHistory& reference) {
    const auto p = problems::wave_smooth_input();
    const auto h = solve_wave(p, tau, input_corrections(m));
    return l2_error(h, reference, p.mesh, h.steps());
}

SubdiffusionCorrections sine_corrections(std::size_t m, bool drop = false) {
    SubdiffusionCorrections c;
    c.sigmas = problems::subdiffusion_sine_sigmas(m);
    c.m1 = c.m2 = m;
    c.drop_far_field = drop;
    return c;
}

}  // namespace

TEST(Wave, ZeroData) {
    WaveProblem p;
    p.alpha = 0.5;
    p.mesh = SpectralMesh::uniform(-1.0, 1.0, 2, 8);
    p.source = [](double, double) { return 0.0; };
    p.phi0 = [](double) { return 0.0; };
    p.psi0 = p.phi0;
    WaveCorrections c;
    c.sigmas = CorrectionSet({2.0, 3.0});
    c.m1 = c.m2 = c.m3 = 2;
    EXPECT_EQ(max_abs(solve_wave(p, 1.0 / 32, c)), 0.0);
    EXPECT_EQ(max_abs(solve_wave_l1_baseline(p, 1.0 / 32)), 0.0);
}

TEST(Wave, BoundaryStaysZero) {
    const auto p = problems::wave_smooth_input();
    const auto h = solve_wave(p, 1.0 / 32, input_corrections(2));
    for (std::size_t n = 0; n <= h.steps(); ++n) {
        EXPECT_EQ(h.u[n](0), 0.0);
        EXPECT_EQ(h.u[n](h.u[n].size() - 1), 0.0);
    }
}

TEST(Wave, Validation) {
    auto p = problems::wave_smooth(0.5);
    WaveCorrections c;
    c.sigmas = CorrectionSet({0.5, 2.0});
    c.m1 = 1;
    EXPECT_THROW(solve_wave(p, 1.0 / 32, c), InvalidParameter);
    c.sigmas = CorrectionSet({2.0, 3.5});
    c.m1 = 2;
    EXPECT_THROW(solve_wave(p, 1.0 / 32, c), InvalidParameter);
    p.alpha = 1.2;
    EXPECT_THROW(solve_wave(p, 1.0 / 32, WaveCorrections{}), InvalidParameter);
}

TEST(Wave, EnergyBounded) {
    WaveProblem p;
    p.mesh = SpectralMesh::uniform(-1.0, 1.0, 2, 12);
    p.source = [](double, double) { return 0.0; };
    p.phi0 = [](double x) { return std::sin(pi * x); };
    p.psi0 = [](double x) { return std::sin(2.0 * pi * x); };
    const AssembledForms forms(p.mesh);
    for (double alpha : {0.2, 0.5, 0.9}) {
        p.alpha = alpha;
        for (int k = 5; k <= 8; ++k) {
            for (std::size_t m3 : {0u, 2u}) {
                WaveCorrections c;
                c.sigmas = CorrectionSet({2.0, 3.0});
                c.m3 = m3;
                const auto h = solve_wave(p, std::ldexp(1.0, -k), c);
                const double e0 = wave_energy(h, forms, p.mu, c.startup());
                for (std::size_t n = c.startup(); n <= h.steps(); ++n) {
                    ASSERT_LE(wave_energy(h, forms, p.mu, n), 10.0 * e0)
                        << "alpha=" << alpha << " k=" << k << " m3=" << m3 << " n=" << n;
                }
            }
        }
    }
}

TEST(Wave, SchemeResiduals) {
    const auto p = problems::wave_smooth(0.5);
    WaveCorrections c;
    c.sigmas = problems::wave_smooth_sigmas();
    c.m1 = 1;
    c.m2 = 2;
    c.m3 = 2;
    const double tau = 1.0 / 64;
    const auto h = solve_wave(p, tau, c);
    for (double r : wave_scheme_residuals(p, tau, c, h)) {
        EXPECT_LE(r, 1e-10);
    }
}

TEST(Wave, SmoothCaseM3Two) {
    const double coarse = smooth_final_error(0.5, 2, std::ldexp(1.0, -8));
    const double fine = smooth_final_error(0.5, 2, std::ldexp(1.0, -9));
    EXPECT_NEAR(order(coarse, fine), 2.00, 0.05);
    EXPECT_NEAR(fine, 1.7279e-6, 0.2 * 1.7279e-6);
}

TEST(Wave, SmoothCaseUncorrectedLosesOrder) {
    const double coarse = smooth_final_error(0.9, 0, std::ldexp(1.0, -8));
    const double fine = smooth_final_error(0.9, 0, std::ldexp(1.0, -9));
    EXPECT_NEAR(order(coarse, fine), 1.11, 0.1);
}

TEST(Wave, OrderLaws) {
    for (double alpha : {0.2, 0.5, 0.8, 0.9}) {
        const double coarse = smooth_final_error(alpha, 0, std::ldexp(1.0, -8));
        const double fine = smooth_final_error(alpha, 0, std::ldexp(1.0, -9));
        EXPECT_GE(order(coarse, fine), 1.5 - alpha - 0.1) << "alpha=" << alpha;
    }
    const double coarse = smooth_final_error(0.2, 1, std::ldexp(1.0, -8));
    const double fine = smooth_final_error(0.2, 1, std::ldexp(1.0, -9));
    EXPECT_NEAR(order(coarse, fine), 2.0, 0.1);
}

TEST(Wave, SmoothInputSelfReference) {
    const auto p = problems::wave_smooth_input();
    const auto reference = solve_wave(p, std::ldexp(1.0, -11), input_corrections(2));
    const double coarse = input_final_error(2, std::ldexp(1.0, -8), reference);
    const double fine = input_final_error(2, std::ldexp(1.0, -9), reference);
    EXPECT_NEAR(fine, 6.85e-8, 0.3 * 6.85e-8);
    EXPECT_NEAR(order(coarse, fine), 2.13, 0.15);
}

TEST(Wave, L1BaselineConverges) {
    const auto p = problems::wave_smooth(0.5);
    double e[2];
    for (int i = 0; i < 2; ++i) {
        const auto h = solve_wave_l1_baseline(p, std::ldexp(1.0, -7 - i));
        e[i] = l2_error(h, p.mesh, h.steps(), problems::wave_smooth_exact);
    }
    EXPECT_GT(order(e[0], e[1]), 1.2);
}

TEST(Subdiffusion, ZeroData) {
    SubdiffusionProblem p;
    p.mesh = SpectralMesh::uniform(0.0, 1.0, 2, 6);
    p.source = [](double, double) { return 0.0; };
    p.phi0 = [](double) { return 0.0; };
    EXPECT_EQ(max_abs(solve_subdiffusion(p, 1.0 / 32, sine_corrections(3))), 0.0);
    EXPECT_EQ(max_abs(solve_subdiffusion_l1_baseline(p, 1.0 / 32)), 0.0);
}

TEST(Subdiffusion, SchemeResiduals) {
    const auto p = problems::subdiffusion_sine();
    const double tau = 1.0 / 128;
    const auto c = sine_corrections(3);
    const auto h = solve_subdiffusion(p, tau, c);
    EXPECT_TRUE(h.v.empty());
    for (double r : subdiffusion_scheme_residuals(p, tau, c, h)) {
        EXPECT_LE(r, 1e-10);
    }
}

TEST(Subdiffusion, CorrectedSineCase) {
    const auto p = problems::subdiffusion_sine();
    const auto c = sine_corrections(3);
    const auto reference = solve_subdiffusion(p, std::ldexp(1.0, -13), c);
    const auto h9 = solve_subdiffusion(p, std::ldexp(1.0, -9), c);
    const auto h10 = solve_subdiffusion(p, std::ldexp(1.0, -10), c);
    const double e9 = average_l2_error(h9, reference, p.mesh);
    const double e10 = average_l2_error(h10, reference, p.mesh);
    EXPECT_NEAR(e10, 1.23e-7, 0.3 * 1.23e-7);
    EXPECT_NEAR(order(e9, e10), 2.8, 0.3);

    const auto dropped = solve_subdiffusion(p, std::ldexp(1.0, -10), sine_corrections(3, true));
    const double ed = average_l2_error(dropped, reference, p.mesh);
    EXPECT_NEAR(ed, e10, 0.1 * e10);
}

TEST(Subdiffusion, L1Baseline) {
    const auto p = problems::subdiffusion_sine();
    const auto reference = solve_subdiffusion_l1_baseline(p, std::ldexp(1.0, -13));
    const auto h10 = solve_subdiffusion_l1_baseline(p, std::ldexp(1.0, -10));
    const auto h11 = solve_subdiffusion_l1_baseline(p, std::ldexp(1.0, -11));
    const double e10 = average_l2_error(h10, reference, p.mesh);
    const double e11 = average_l2_error(h11, reference, p.mesh);
    EXPECT_NEAR(e11, 3.75e-5, 0.2 * 3.75e-5);
    EXPECT_NEAR(order(e10, e11), 1.17, 0.1);
}

TEST(Subdiffusion, L1ExactForLinearInTime) {
    auto p = problems::subdiffusion_sine();
    const double a1 = p.alpha1;
    const double a2 = p.alpha2;
    const double g1 = fracwsgl::gamma(2.0 - a1);
    const double g2 = fracwsgl::gamma(2.0 - a2);
    p.source = [=](double x, double t) {
        const double time = std::pow(t, 1.0 - a1) / g1 + std::pow(t, 1.0 - a2) / g2 + pi * pi * t;
        return std::sin(pi * x) * time;
    };
    const auto h = solve_subdiffusion_l1_baseline(p, 1.0 / 64);
    const auto exact = [](double x, double t) { return t * std::sin(pi * x); };
    for (std::size_t n = 0; n <= h.steps(); ++n) {
        EXPECT_LE(l2_error(h, p.mesh, n, exact), 1e-10) << "n=" << n;
    }
}

TEST(Errors, ProjectedExactHistory) {
    const auto mesh = problems::wave_mesh();
    FieldHistory h;
    h.tau = 0.25;
    for (int n = 0; n <= 4; ++n) {
        const double t = n * h.tau;
        h.u.push_back(interpolate([t](double x) { return problems::wave_smooth_exact(x, t); }, mesh));
    }
    for (std::size_t n = 0; n <= 4; ++n) {
        const double t = h.time(n);
        const double spatial =
            l2_error(mesh, h.u[n], [t](double x) { return problems::wave_smooth_exact(x, t); });
        EXPECT_NEAR(l2_error(h, mesh, n, problems::wave_smooth_exact), spatial, 1e-15);
        EXPECT_LE(spatial, 1e-10);
    }
    EXPECT_EQ(l2_error(h, h, mesh, 4), 0.0);
    EXPECT_EQ(average_l2_error(h, h, mesh), 0.0);
}

TEST(Errors, ReferenceGridMismatch) {
    const auto mesh = SpectralMesh::uniform(0.0, 1.0, 1, 4);
    FieldHistory coarse;
    coarse.tau = 0.5;
    coarse.u.assign(3, Eigen::VectorXd::Zero(5));
    FieldHistory odd;
    odd.tau = 0.3;
    odd.u.assign(4, Eigen::VectorXd::Zero(5));
    EXPECT_THROW(average_l2_error(coarse, odd, mesh), Error);
}

TEST(Export, HistoryCsv) {
    const auto p = problems::subdiffusion_sine();
    const auto h = solve_subdiffusion(p, 0.25, sine_corrections(1));
    std::ostringstream out;
    write_history_csv(out, h, p.mesh);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("field,t,", 0), 0u);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(line.rfind("u,", 0), 0u);
        ++rows;
    }
    EXPECT_EQ(rows, h.steps() + 1);
}
