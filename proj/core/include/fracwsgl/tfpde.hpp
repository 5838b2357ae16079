#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fracwsgl/corrections.hpp"
#include "fracwsgl/sem.hpp"

namespace fracwsgl {

using SpaceTimeFunction = std::function<double(double x, double t)>;

/// ∂_t²U + ν ᶜD^{1+α} U = μ ∂_x²U + f, U(0) = φ_0, ∂_tU(0) = ψ_0, U = 0 on ∂Ω.
struct WaveProblem {
    double nu = 1.0;
    double mu = 1.0;
    double alpha = 0.5;
    SpaceTimeFunction source;
    std::function<double(double)> phi0;
    std::function<double(double)> psi0;
    double T = 1.0;
    SpectralMesh mesh = SpectralMesh::uniform(-1.0, 1.0, 1, 1);

    void validate() const;
};

/// ᶜD^{α_1} U + ν ᶜD^{α_2} U = μ ∂_x²U + f, U(0) = φ_0, U = 0 on ∂Ω.
struct SubdiffusionProblem {
    double alpha1 = 0.75;
    double alpha2 = 0.5;
    double nu = 1.0;
    double mu = 1.0;
    SpaceTimeFunction source;
    std::function<double(double)> phi0;
    double T = 1.0;
    SpectralMesh mesh = SpectralMesh::uniform(-1.0, 1.0, 1, 1);

    void validate() const;
};

/// Exponents σ_r of U(t) - U(0) - tU'(0) and how many of them each
/// correction sum uses: m1 for the U update, m2 for the V update and m3 for
/// the fractional term (the latter two act on exponents σ_r - 1).
struct WaveCorrections {
    CorrectionSet sigmas;
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    std::size_t m3 = 0;

    std::size_t startup() const;
};

/// How the source enters the V equation at the half step.
enum class SourceRule {
    average,   // (I_N f(t_n) + I_N f(t_{n+1})) / 2
    midpoint,  // I_N f(t_n + τ/2)
};

struct WaveOptions {
    SourceRule source_rule = SourceRule::average;
};

struct SubdiffusionCorrections {
    CorrectionSet sigmas;
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    /// Zero the correction sums for n >= ceil(n_T / 5).
    bool drop_far_field = false;
};

/// Nodal coefficient vectors per step; v is empty for the subdiffusion
/// solvers. Boundary entries are zero.
struct FieldHistory {
    double tau = 0.0;
    std::vector<Eigen::VectorXd> u;
    std::vector<Eigen::VectorXd> v;

    std::size_t steps() const { return u.empty() ? 0 : u.size() - 1; }
    double time(std::size_t n) const { return static_cast<double>(n) * tau; }
};

FieldHistory solve_wave(const WaveProblem& problem, double tau, const WaveCorrections& corrections,
                        const WaveOptions& options = {});

/// Crank-Nicolson in time with the L1 formula for the Caputo term.
FieldHistory solve_wave_l1_baseline(const WaveProblem& problem, double tau,
                                    const WaveOptions& options = {});

/// Max-norm of the two scheme residuals for every step n -> n+1 of a wave
/// history, scaled by the history's largest coefficient.
std::vector<double> wave_scheme_residuals(const WaveProblem& problem, double tau,
                                          const WaveCorrections& corrections,
                                          const FieldHistory& history,
                                          const WaveOptions& options = {});

FieldHistory solve_subdiffusion(const SubdiffusionProblem& problem, double tau,
                                const SubdiffusionCorrections& corrections);

FieldHistory solve_subdiffusion_l1_baseline(const SubdiffusionProblem& problem, double tau);

/// Scaled residuals of the subdiffusion scheme equations n = 1..n_T.
std::vector<double> subdiffusion_scheme_residuals(const SubdiffusionProblem& problem, double tau,
                                                  const SubdiffusionCorrections& corrections,
                                                  const FieldHistory& history);

/// ‖u_N^n - U(t_n)‖.
double l2_error(const FieldHistory& history, const SpectralMesh& mesh, std::size_t n,
                const SpaceTimeFunction& exact);

/// ‖u_N^n - u_ref(t_n)‖ against a finer history on the same mesh.
double l2_error(const FieldHistory& history, const FieldHistory& reference,
                const SpectralMesh& mesh, std::size_t n);

/// (τ Σ_{n=0}^{n_T} ‖u_N^n - U(t_n)‖²)^{1/2}.
double average_l2_error(const FieldHistory& history, const SpectralMesh& mesh,
                        const SpaceTimeFunction& exact);
double average_l2_error(const FieldHistory& history, const FieldHistory& reference,
                        const SpectralMesh& mesh);

/// ‖v_N^n‖² + μ‖∂_x u_N^n‖² with the assembled (discrete) forms.
double wave_energy(const FieldHistory& history, const AssembledForms& forms, double mu,
                   std::size_t n);

/// Rows `u,t,values...` (and `v,t,...` when present) under a header
/// `field,t,<node coordinates>`.
void write_history_csv(std::ostream& out, const FieldHistory& history, const SpectralMesh& mesh);

}  // namespace fracwsgl
