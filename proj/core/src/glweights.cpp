#include "fracwsgl/glweights.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/specfun.hpp"

namespace fracwsgl {

SampledPath SampledPath::sample(const std::function<double(double)>& f, double tau,
                                std::size_t n_steps) {
    SampledPath path{tau, std::vector<double>(n_steps + 1)};
    for (std::size_t k = 0; k <= n_steps; ++k) {
        path.values[k] = f(path.time(k));
    }
    return path;
}

GLWeightTable::GLWeightTable(double alpha, std::size_t K) : alpha_(alpha), omega_(K + 1) {
    omega_[0] = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        omega_[k] = (1.0 - (alpha + 1.0) / static_cast<double>(k)) * omega_[k - 1];
    }
}

WSGLWeightTable::WSGLWeightTable(double alpha, std::size_t K)
    : WSGLWeightTable(GLWeightTable(alpha, K)) {}

WSGLWeightTable::WSGLWeightTable(const GLWeightTable& omega)
    : alpha_(omega.alpha()), g_(omega.length() + 1) {
    const double lead = (2.0 + alpha_) / 2.0;
    const double lag = alpha_ / 2.0;
    g_[0] = lead * omega[0];
    for (std::size_t k = 1; k < g_.size(); ++k) {
        g_[k] = lead * omega[k] - lag * omega[k - 1];
    }
}

GLWeightTable gl_weights(double alpha, std::size_t K) { return GLWeightTable(alpha, K); }

WSGLWeightTable wsgl_weights(double alpha, std::size_t K) {
    if (K < 1) {
        throw InvalidParameter("wsgl_weights: K must be at least 1");
    }
    return WSGLWeightTable(alpha, K);
}

double apply_shifted_gl(const SampledPath& path, double alpha, int q, std::size_t n) {
    if (static_cast<long long>(n) < std::llabs(q)) {
        throw InvalidParameter("apply_shifted_gl: step index n must be >= |q|");
    }
    const long long top = static_cast<long long>(n) + q;
    if (path.values.empty() || top > static_cast<long long>(path.steps())) {
        throw IndexRangeError("apply_shifted_gl: sample " + std::to_string(top) +
                              " lies beyond the sampled path");
    }
    const auto upper = static_cast<std::size_t>(top);
    const GLWeightTable omega(alpha, upper);
    double acc = 0.0;
    for (std::size_t k = 0; k <= upper; ++k) {
        acc += omega[k] * path.values[upper - k];
    }
    return acc / std::pow(path.tau, alpha);
}

double apply_wsgl_pair(const SampledPath& path, double alpha, int p, int q, std::size_t n) {
    if (p == q) {
        throw InvalidParameter("apply_wsgl_pair: shifts p and q must differ");
    }
    const double denom = 2.0 * static_cast<double>(p - q);
    const double cp = (alpha - 2.0 * q) / denom;
    const double cq = (2.0 * p - alpha) / denom;
    return cp * apply_shifted_gl(path, alpha, p, n) + cq * apply_shifted_gl(path, alpha, q, n);
}

double rl_deriv_power(double alpha, double sigma, double t) {
    if (sigma < 0.0) {
        throw DomainError("rl_deriv_power: sigma must be non-negative");
    }
    return gamma(sigma + 1.0) / gamma(sigma + 1.0 - alpha) * std::pow(t, sigma - alpha);
}

}  // namespace fracwsgl
