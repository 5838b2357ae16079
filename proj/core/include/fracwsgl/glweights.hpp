#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracwsgl {

/// Samples U^0..U^{n_T} of a scalar function on the uniform grid t_k = kτ.
struct SampledPath {
    double tau = 0.0;
    std::vector<double> values;

    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
    double time(std::size_t n) const { return static_cast<double>(n) * tau; }

    /// Samples f at t_0..t_{n_steps}.
    static SampledPath sample(const std::function<double(double)>& f, double tau,
                              std::size_t n_steps);
};

/// Grünwald-Letnikov weights ω_k = (-1)^k C(α, k), k = 0..K.
class GLWeightTable {
public:
    GLWeightTable(double alpha, std::size_t K);

    double alpha() const { return alpha_; }
    std::size_t length() const { return omega_.size() - 1; }
    double operator[](std::size_t k) const { return omega_[k]; }
    std::span<const double> weights() const { return omega_; }

private:
    double alpha_;
    std::vector<double> omega_;
};

/// Second-order weighted-shifted GL weights g_k for the (p, q) = (0, -1) pair,
/// i.e. the coefficients of (1 - z)^α (1 + α/2 - (α/2) z).
class WSGLWeightTable {
public:
    WSGLWeightTable(double alpha, std::size_t K);
    explicit WSGLWeightTable(const GLWeightTable& omega);

    double alpha() const { return alpha_; }
    std::size_t length() const { return g_.size() - 1; }
    double operator[](std::size_t k) const { return g_[k]; }
    std::span<const double> weights() const { return g_; }

private:
    double alpha_;
    std::vector<double> g_;
};

GLWeightTable gl_weights(double alpha, std::size_t K);

/// Requires K >= 1.
WSGLWeightTable wsgl_weights(double alpha, std::size_t K);

/// Shifted GL operator τ^{-α} Σ_{k=0}^{n+q} ω_k U^{n-k+q}.
///
/// Needs n >= |q| and n + q <= path.steps(); samples past the end of the path
/// raise IndexRangeError rather than being extrapolated.
double apply_shifted_gl(const SampledPath& path, double alpha, int q, std::size_t n);

/// Weighted pair of shifted GL operators,
///   (α - 2q) / (2(p - q)) · B_p + (2p - α) / (2(p - q)) · B_q.
/// Throws InvalidParameter when p == q.
double apply_wsgl_pair(const SampledPath& path, double alpha, int p, int q, std::size_t n);

/// Exact Riemann-Liouville derivative of t^σ:
///   Γ(σ + 1) / Γ(σ + 1 - α) · t^{σ - α}.
double rl_deriv_power(double alpha, double sigma, double t);

}  // namespace fracwsgl
