#include "fracwsgl/problems.hpp"

#include <cmath>
#include <numbers>

#include "fracwsgl/specfun.hpp"

namespace fracwsgl::problems {

using std::numbers::pi;

MultiTermProblem two_term_mittag_leffler(double alpha, double T) {
    MultiTermProblem p;
    p.nu = {1.0, 1.5};
    p.alphas = {2.0 * alpha, alpha};
    p.rhs = [](double, double y) { return -0.5 * y; };
    p.rhs_dy = [](double, double) { return -0.5; };
    p.y0 = 1.0;
    p.T = T;
    return p;
}

double two_term_mittag_leffler_exact(double alpha, double t) {
    const double s = std::pow(t, alpha);
    return 2.0 * mittag_leffler(alpha, -0.5 * s) - mittag_leffler(alpha, -s);
}

MultiTermProblem cubic_two_term(double alpha1, double alpha2, double T) {
    MultiTermProblem p;
    p.nu = {1.0, 1.0};
    p.alphas = {alpha1, alpha2};
    p.rhs = [](double t, double y) { return y * (1.0 - y * y) + std::cos(t); };
    p.rhs_dy = [](double, double y) { return 1.0 - 3.0 * y * y; };
    p.y0 = 0.5;
    p.T = T;
    return p;
}

MultiTermProblem linear_decay(double lambda, double alpha, double T) {
    MultiTermProblem p;
    p.nu = {1.0};
    p.alphas = {alpha};
    p.rhs = [lambda](double, double y) { return -lambda * y; };
    p.rhs_dy = [lambda](double, double) { return -lambda; };
    p.y0 = 1.0;
    p.T = T;
    return p;
}

SpectralMesh wave_mesh() { return SpectralMesh({-1.0, -0.5, 0.5, 1.0}, {24, 32, 24}); }

double wave_smooth_exact(double x, double t) {
    return ((((t + 1.0) * t + 1.0) * t + 1.0) * t + 1.0) * std::sin(2.0 * pi * x);
}

WaveProblem wave_smooth(double alpha) {
    WaveProblem p;
    p.alpha = alpha;
    p.nu = 1.0;
    p.mu = 1.0;
    p.T = 1.0;
    p.mesh = wave_mesh();
    p.phi0 = [](double x) { return std::sin(2.0 * pi * x); };
    p.psi0 = p.phi0;
    // Caputo derivative of order 1 + α kills 1 and t.
    double c[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (int k = 2; k <= 4; ++k) {
        c[k] = fracwsgl::gamma(k + 1.0) / fracwsgl::gamma(k - alpha);
    }
    p.source = [alpha, c](double x, double t) {
        const double poly = (((t + 1.0) * t + 1.0) * t + 1.0) * t + 1.0;
        const double dtt = (12.0 * t + 6.0) * t + 2.0;
        double frac = 0.0;
        if (t > 0.0) {
            for (int k = 2; k <= 4; ++k) {
                frac += c[k] * std::pow(t, k - 1.0 - alpha);
            }
        }
        return std::sin(2.0 * pi * x) * (dtt + frac + 4.0 * pi * pi * poly);
    };
    return p;
}

WaveProblem wave_smooth_input(double alpha) {
    WaveProblem p;
    p.alpha = alpha;
    p.nu = 1.0;
    p.mu = 1.0;
    p.T = 1.0;
    p.mesh = wave_mesh();
    p.phi0 = [](double) { return 0.0; };
    p.psi0 = p.phi0;
    p.source = [](double x, double t) { return std::exp(-t) * std::sin(pi * x); };
    return p;
}

CorrectionSet wave_smooth_sigmas() { return CorrectionSet({2.0, 3.0, 4.0}); }

CorrectionSet wave_smooth_input_sigmas() { return CorrectionSet({2.0, 2.5, 3.0}); }

SpectralMesh subdiffusion_mesh() { return SpectralMesh({0.0, 0.5, 1.0}, {16, 16}); }

SubdiffusionProblem subdiffusion_sine() {
    SubdiffusionProblem p;
    p.alpha1 = 0.75;
    p.alpha2 = 0.5;
    p.nu = 1.0;
    p.mu = 1.0;
    p.T = 1.0;
    p.mesh = subdiffusion_mesh();
    p.phi0 = [](double) { return 0.0; };
    p.source = [](double x, double t) { return std::exp(-t) * std::sin(pi * x); };
    return p;
}

CorrectionSet subdiffusion_sine_sigmas(std::size_t m) {
    return CorrectionSet::linear(m, 0.25, 2.0);
}

}  // namespace fracwsgl::problems
