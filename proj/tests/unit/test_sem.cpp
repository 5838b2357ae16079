#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/problems.hpp"
#include "fracwsgl/sem.hpp"

using namespace fracwsgl;
using std::numbers::pi;

TEST(Lgl, ClosedFormN2) {
    const auto q = lgl_nodes(2);
    ASSERT_EQ(q.nodes.size(), 3u);
    const double x[] = {-1.0, 0.0, 1.0};
    const double w[] = {1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(q.nodes[i], x[i], 1e-14);
        EXPECT_NEAR(q.weights[i], w[i], 1e-14);
    }
}

TEST(Lgl, ClosedFormN4) {
    const auto q = lgl_nodes(4);
    ASSERT_EQ(q.nodes.size(), 5u);
    const double r = std::sqrt(3.0 / 7.0);
    const double x[] = {-1.0, -r, 0.0, r, 1.0};
    const double w[] = {0.1, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 0.1};
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(q.nodes[i], x[i], 1e-14);
        EXPECT_NEAR(q.weights[i], w[i], 1e-14);
    }
    EXPECT_THROW(lgl_nodes(0), InvalidParameter);
}

TEST(Lgl, ExactForDegree2NMinus1) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (std::size_t N : {3u, 8u, 16u, 32u}) {
        const auto q = lgl_nodes(N);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> c(2 * N);
            for (double& v : c) {
                v = coef(rng);
            }
            double exact = 0.0;
            for (std::size_t k = 0; k < c.size(); k += 2) {
                exact += 2.0 * c[k] / (k + 1.0);
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                double p = 0.0;
                for (std::size_t k = c.size(); k-- > 0;) {
                    p = p * q.nodes[i] + c[k];
                }
                sum += q.weights[i] * p;
            }
            EXPECT_NEAR(sum, exact, 1e-13) << "N=" << N;
        }
    }
}

TEST(Gauss, ExactForDegree2NMinus1) {
    const auto q = gauss_legendre(6);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        sum += q.weights[i] * std::pow(q.nodes[i], 10);
    }
    EXPECT_NEAR(sum, 2.0 / 11.0, 1e-14);
}

TEST(Legendre, Values) {
    const auto v = legendre(3, 0.5);
    EXPECT_NEAR(v.p, 0.5 * (5.0 * 0.125 - 1.5), 1e-15);
    EXPECT_NEAR(v.dp, 0.5 * (15.0 * 0.25 - 3.0), 1e-15);
}

TEST(Differentiation, ExactOnPolynomials) {
    const auto q = lgl_nodes(6);
    const auto D = differentiation_matrix(q.nodes);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < q.nodes.size(); ++j) {
            d += D(i, j) * std::pow(q.nodes[j], 5);
        }
        EXPECT_NEAR(d, 5.0 * std::pow(q.nodes[i], 4), 1e-12);
    }
}

TEST(Mesh, Layout) {
    const auto mesh = problems::wave_mesh();
    EXPECT_EQ(mesh.elements(), 3u);
    EXPECT_EQ(mesh.dofs(), 24u + 32u + 24u + 1u);
    EXPECT_EQ(mesh.interior().size(), mesh.dofs() - 2);
    EXPECT_DOUBLE_EQ(mesh.coordinates().front(), -1.0);
    EXPECT_DOUBLE_EQ(mesh.coordinates().back(), 1.0);
    EXPECT_DOUBLE_EQ(mesh.coordinates()[24], -0.5);
    EXPECT_EQ(mesh.locate(-0.5), 0u);
    EXPECT_EQ(mesh.locate(0.0), 1u);
    EXPECT_THROW(SpectralMesh({0.0, 1.0}, {2, 3}), InvalidParameter);
    EXPECT_THROW(SpectralMesh({0.0, 0.0}, {2}), InvalidParameter);
}

TEST(Interpolation, ReproducesPolynomials) {
    const auto mesh = SpectralMesh({0.0, 0.3, 1.0}, {5, 7});
    const auto f = [](double x) { return ((2.0 * x - 1.0) * x + 0.5) * x * x * x - 3.0; };
    const auto c = interpolate(f, mesh);
    for (double x : {0.0, 0.11, 0.3, 0.5, 0.77, 1.0}) {
        EXPECT_NEAR(mesh.evaluate(c, x), f(x), 1e-13);
    }
    EXPECT_LT(l2_error(mesh, c, f), 1e-13);
}

TEST(Interpolation, SmoothFunctionOnWaveMesh) {
    const auto mesh = problems::wave_mesh();
    const auto f = [](double x) { return std::sin(2.0 * pi * x); };
    const auto c = interpolate(f, mesh);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = -1.0 + i * 1e-3;
        worst = std::max(worst, std::abs(mesh.evaluate(c, x) - f(x)));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(H1Projection, Idempotent) {
    const auto mesh = SpectralMesh({-1.0, 0.0, 1.0}, {8, 8});
    const auto f = [](double x) { return (1.0 - x * x) * std::exp(x); };
    const auto p = h1_projection(f, mesh);
    const auto pp = h1_projection([&](double x) { return mesh.evaluate(p, x); }, mesh);
    EXPECT_LT((p - pp).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(p(0), 0.0);
    EXPECT_EQ(p(p.size() - 1), 0.0);
}

TEST(H1Projection, SpectralDecay) {
    const auto f = [](double x) { return std::sin(pi * x); };
    const auto df = [](double x) { return pi * std::cos(pi * x); };
    double prev = 0.0;
    for (std::size_t N = 4; N <= 16; N += 4) {
        const auto mesh = SpectralMesh::uniform(-1.0, 1.0, 1, N);
        const double e = h1_seminorm_error(mesh, h1_projection(f, mesh), df);
        if (N > 4 && prev > 1e-12) {
            EXPECT_GE(prev / e, 10.0) << "N=" << N;
        }
        prev = e;
    }
}

TEST(H1Projection, GalerkinOrthogonality) {
    const auto mesh = SpectralMesh({-1.0, 0.2, 1.0}, {6, 9});
    const auto f = [](double x) { return std::cos(pi * x / 2.0) * std::exp(x); };
    const auto p = h1_projection(f, mesh);
    // (∂(P f - f), ∂v) = 0 for every interior hat function; the f part uses
    // a much finer interpolant so quadrature error stays negligible.
    const auto fine = SpectralMesh({-1.0, 0.2, 1.0}, {6 + 40, 9 + 40});
    const auto fc = interpolate(f, fine);
    const auto fine_forms = assemble(fine);
    const auto pf = interpolate([&](double x) { return mesh.evaluate(p, x); }, fine);
    for (std::size_t g : mesh.interior()) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dofs()));
        e(static_cast<Eigen::Index>(g)) = 1.0;
        const auto ef = interpolate([&](double x) { return mesh.evaluate(e, x); }, fine);
        const double r = fine_forms.stiffness_form(pf - fc, ef);
        EXPECT_NEAR(r, 0.0, 1e-10);
    }
}

TEST(Assembly, HatFunctionsAndMass) {
    const double h = 0.25;
    const auto mesh = SpectralMesh::uniform(0.0, 1.0, 4, 1);
    const auto forms = assemble(mesh);
    for (std::size_t g : mesh.interior()) {
        EXPECT_NEAR(forms.stiffness()(g, g), 2.0 / h, 1e-13);
        EXPECT_NEAR(forms.stiffness()(g, g + 1), -1.0 / h, 1e-13);
    }
    const auto wave = assemble(problems::wave_mesh());
    EXPECT_NEAR(wave.mass_diagonal().sum(), 2.0, 1e-13);
    const Eigen::MatrixXd& K = wave.stiffness();
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(K.rows()));
    EXPECT_LT((K * one).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Assembly, PoissonSolve) {
    // -u'' = π² sin(πx) on (0, 1), u = sin(πx).
    const auto mesh = problems::subdiffusion_mesh();
    const auto forms = assemble(mesh);
    const Eigen::MatrixXd K = forms.interior_stiffness();
    const Eigen::VectorXd f = interpolate([](double x) { return pi * pi * std::sin(pi * x); }, mesh);
    const Eigen::VectorXd rhs = restrict_interior(mesh, forms.mass_diagonal().cwiseProduct(f));
    const Eigen::VectorXd u = extend_interior(mesh, K.ldlt().solve(rhs));
    EXPECT_LE(l2_error(mesh, u, [](double x) { return std::sin(pi * x); }), 1e-10);
}

TEST(Norms, L2OfConstant) {
    const auto mesh = SpectralMesh({0.0, 0.4, 2.0}, {3, 5});
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.dofs()), 3.0);
    EXPECT_NEAR(l2_norm(mesh, c), 3.0 * std::sqrt(2.0), 1e-13);
}
