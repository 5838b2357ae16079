#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fracwsgl/corrections.hpp"
#include "fracwsgl/glweights.hpp"

namespace fracwsgl {

/// Σ_j ν_j ᶜD^{α_j} Y(t) = f(t, Y(t)) on (0, T], Y(0) = y0.
struct MultiTermProblem {
    std::vector<double> nu;
    std::vector<double> alphas;
    std::function<double(double t, double y)> rhs;
    /// ∂f/∂y. Optional; a central difference is used when empty.
    std::function<double(double t, double y)> rhs_dy;
    double y0 = 0.0;
    double T = 1.0;

    std::size_t terms() const { return alphas.size(); }

    /// Throws InvalidParameter on inconsistent data.
    void validate() const;
};

struct SolverConfig {
    double tau = 0.0;
    /// One set per term, or a single set shared by all terms; empty means
    /// the uncorrected scheme.
    std::vector<CorrectionSet> corrections;
    double picard_tol = 1e-14;
    std::size_t picard_max_iters = 100;
    double newton_tol = 1e-13;
    std::size_t newton_max_iters = 50;
};

/// Number of steps T/τ. Throws InvalidParameter unless τ divides T.
std::size_t step_count(double T, double tau);

/// Uncorrected WSGL scheme when every correction set is empty.
SampledPath solve_corrected_wsgl(const MultiTermProblem& problem, const SolverConfig& config);

/// Implicit L1 scheme; each step solved like the WSGL scheme.
SampledPath solve_l1(const MultiTermProblem& problem, const SolverConfig& config);

/// Product trapezoidal rule for the integral form of a two-term problem with
/// ν = (1, 1) and α_1 > α_2.
SampledPath solve_trapezoidal(const MultiTermProblem& problem, const SolverConfig& config);

/// L1 weights b_0..b_K for one order.
std::vector<double> l1_weights(double alpha, double tau, std::size_t K);

/// Product-trapezoid weights a_{n,0..n} of the fractional integral of order beta.
std::vector<double> trapezoidal_weights(double beta, double tau, std::size_t n);

/// σ_k = α_1 + (α_1 - α_2)(k - 1), k = 1..m.
CorrectionSet two_term_sigma_guideline(double alpha1, double alpha2, std::size_t m);

/// Implicit startup block of the corrected WSGL scheme.
///
/// Holds the scheme equations n = 1..m with the unknowns ŷ^1..ŷ^m, where m
/// is the largest correction count across the terms.
class StartupBlock {
public:
    StartupBlock(const MultiTermProblem& problem, const SolverConfig& config);

    std::size_t size() const { return m_; }

    /// Residuals of the scheme equations n = 1..m at y^1..y^m.
    std::vector<double> residual(const std::vector<double>& y) const;

    /// Newton iteration on the whole block from the guess y^k = y0.
    std::vector<double> solve() const;

    /// One Gauss-Seidel sweep: equation n is solved for y^n with the other
    /// unknowns frozen at their latest values.
    std::vector<double> sweep(const std::vector<double>& y) const;

private:
    const MultiTermProblem* problem_;
    SolverConfig config_;
    std::size_t m_ = 0;
    // Linear part of the block: matrix_[n-1][k-1] multiplies ŷ^k in equation n.
    std::vector<std::vector<double>> matrix_;
};

struct ErrorReport {
    double max_error = 0.0;
    double final_error = 0.0;
    double avg_error = 0.0;
};

ErrorReport error_report(const SampledPath& path, const std::function<double(double)>& exact);

/// The reference grid must refine the path grid by an integer factor.
ErrorReport error_report(const SampledPath& path, const SampledPath& reference);

}  // namespace fracwsgl
