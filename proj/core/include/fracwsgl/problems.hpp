#pragma once

#include <functional>

#include "fracwsgl/fode.hpp"
#include "fracwsgl/tfpde.hpp"

namespace fracwsgl::problems {

/// ᶜD^{2α}Y + (3/2) ᶜD^{α}Y = -Y/2, Y(0) = 1, 0 < α <= 1/2.
MultiTermProblem two_term_mittag_leffler(double alpha, double T = 1.0);

/// Y(t) = 2E_α(-t^α/2) - E_α(-t^α).
double two_term_mittag_leffler_exact(double alpha, double t);

/// ᶜD^{α_1}Y + ᶜD^{α_2}Y = Y(1 - Y²) + cos t, Y(0) = 1/2.
MultiTermProblem cubic_two_term(double alpha1, double alpha2, double T = 10.0);

/// ᶜD^{α}Y = -λY, Y(0) = 1.
MultiTermProblem linear_decay(double lambda, double alpha, double T = 1.0);

/// Elements (-1, -1/2), (-1/2, 1/2), (1/2, 1) with degrees 24, 32, 24.
SpectralMesh wave_mesh();

/// Manufactured U = (t⁴ + t³ + t² + t + 1) sin(2πx) on (-1, 1), ν = μ = 1, T = 1.
WaveProblem wave_smooth(double alpha);
double wave_smooth_exact(double x, double t);

/// f = e^{-t} sin(πx) with zero initial data, α = 1/2 unless given.
WaveProblem wave_smooth_input(double alpha = 0.5);

/// Expansion exponents of U - U(0) - tU'(0) for the two wave cases.
CorrectionSet wave_smooth_sigmas();
CorrectionSet wave_smooth_input_sigmas();

/// (0, 1) split at 1/2 with degree 16 on both halves.
SpectralMesh subdiffusion_mesh();

/// ᶜD^{3/4}U + ᶜD^{1/2}U = ∂_x²U + e^{-t} sin(πx), zero data.
SubdiffusionProblem subdiffusion_sine();

/// σ_k = (2 + k)/4.
CorrectionSet subdiffusion_sine_sigmas(std::size_t m);

}  // namespace fracwsgl::problems
