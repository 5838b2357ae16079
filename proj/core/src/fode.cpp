#include "fracwsgl/fode.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/specfun.hpp"

namespace fracwsgl {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double slope(const MultiTermProblem& p, double t, double y) {
    if (p.rhs_dy) {
        return p.rhs_dy(t, y);
    }
    const double h = 1e-6 * std::max(1.0, std::abs(y));
    return (p.rhs(t, y + h) - p.rhs(t, y - h)) / (2.0 * h);
}

// Solves d x + h = f(t, y0 + x) for x: Newton first, plain fixed-point
// iteration if Newton stalls.
double solve_scalar(const MultiTermProblem& p, const SolverConfig& cfg, double t, double d,
                    double h, double guess) {
    double x = guess;
    const double tol = std::max(cfg.newton_tol, 4.0 * kEps);
    for (std::size_t it = 0; it < cfg.newton_max_iters; ++it) {
        const double y = p.y0 + x;
        const double F = d * x + h - p.rhs(t, y);
        const double dF = d - slope(p, t, y);
        if (!std::isfinite(F) || !std::isfinite(dF) || dF == 0.0) {
            break;
        }
        const double dx = F / dF;
        x -= dx;
        if (!std::isfinite(x)) {
            break;
        }
        if (std::abs(dx) <= tol * std::max(1.0, std::abs(x))) {
            return x;
        }
    }

    if (d == 0.0) {
        throw SingularMatrixError("implicit step has a zero leading coefficient");
    }
    x = guess;
    for (std::size_t it = 0; it < cfg.picard_max_iters; ++it) {
        const double next = (p.rhs(t, p.y0 + x) - h) / d;
        if (!std::isfinite(next)) {
            break;
        }
        const double change = std::abs(next - x);
        x = next;
        if (change <= cfg.picard_tol * std::max(1.0, std::abs(x))) {
            return x;
        }
    }
    throw ConvergenceError("implicit step at t = " + std::to_string(t) + " did not converge");
}

std::vector<CorrectionSet> per_term_sets(const MultiTermProblem& p, const SolverConfig& cfg) {
    const std::size_t Q = p.terms();
    if (cfg.corrections.empty()) {
        return std::vector<CorrectionSet>(Q);
    }
    if (cfg.corrections.size() == 1) {
        return std::vector<CorrectionSet>(Q, cfg.corrections.front());
    }
    if (cfg.corrections.size() != Q) {
        throw InvalidParameter("solver config: expected 1 or " + std::to_string(Q) +
                               " correction sets, got " + std::to_string(cfg.corrections.size()));
    }
    return cfg.corrections;
}

void validate_config(const SolverConfig& cfg) {
    if (!(cfg.tau > 0.0)) {
        throw InvalidParameter("solver config: tau must be positive");
    }
    if (!(cfg.picard_tol > 0.0) || !(cfg.newton_tol > 0.0)) {
        throw InvalidParameter("solver config: tolerances must be positive");
    }
}

// Σ_j ν_j τ^{-α_j} g^{(α_j)}_k and the scaled starting weights of each term.
struct WsglHistory {
    std::vector<double> kernel;
    std::vector<double> coeff;
    std::vector<StartingWeights> weights;

    WsglHistory(const MultiTermProblem& p, const std::vector<CorrectionSet>& sets, double tau,
                std::size_t nT)
        : kernel(nT + 1, 0.0) {
        for (std::size_t j = 0; j < p.terms(); ++j) {
            const double c = p.nu[j] * std::pow(tau, -p.alphas[j]);
            const WSGLWeightTable g(p.alphas[j], std::max<std::size_t>(nT, 1));
            for (std::size_t k = 0; k <= nT; ++k) {
                kernel[k] += c * g[k];
            }
            coeff.push_back(c);
            weights.push_back(StartingWeights::fractional(p.alphas[j], sets[j], g, nT));
        }
    }

    // Correction contribution Σ_j c_j Σ_r w^{(j)}_{n,r} ŷ^r.
    double correction(std::size_t n, const std::vector<double>& yhat) const {
        double s = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (weights[j].m() == 0) {
                continue;
            }
            const auto w = weights[j].row(n);
            double inner = 0.0;
            for (std::size_t r = 1; r <= w.size(); ++r) {
                inner += w[r - 1] * yhat[r];
            }
            s += coeff[j] * inner;
        }
        return s;
    }
};

// (j+1)^p - 2 j^p + (j-1)^p without cancellation for large j.
double second_difference_power(double p, std::size_t j) {
    const double jj = static_cast<double>(j);
    if (j < 8) {
        return std::pow(jj + 1.0, p) - 2.0 * std::pow(jj, p) + std::pow(jj - 1.0, p);
    }
    // j^p Σ_{k even >= 2} 2 C(p, k) j^{-k}
    const double x2 = 1.0 / (jj * jj);
    double binom = p * (p - 1.0) / 2.0;
    double xk = x2;
    double sum = 0.0;
    for (int k = 2; k < 200; k += 2) {
        const double term = 2.0 * binom * xk;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) {
            break;
        }
        binom *= (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0));
        xk *= x2;
    }
    return std::pow(jj, p) * sum;
}

// (n-1)^{p} - (n-1-β) n^{β} with p = β+1, stable for large n.
double trapezoid_first_weight(double beta, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double p = beta + 1.0;
    if (n < 8) {
        return std::pow(nn - 1.0, p) - (nn - 1.0 - beta) * std::pow(nn, beta);
    }
    // n^p [(1 - x)^p - 1 + p x], x = 1/n
    const double x = 1.0 / nn;
    double binom = p * (p - 1.0) / 2.0;
    double xk = x * x;
    double sum = 0.0;
    for (int k = 2; k < 400; ++k) {
        const double term = binom * xk;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) {
            break;
        }
        binom *= -(p - k) / (k + 1.0);
        xk *= x;
    }
    return std::pow(nn, p) * sum;
}

}  // namespace

void MultiTermProblem::validate() const {
    if (alphas.empty() || alphas.size() != nu.size()) {
        throw InvalidParameter("multi-term problem: need matching, nonempty order and coefficient lists");
    }
    if (!(nu[0] > 0.0)) {
        throw InvalidParameter("multi-term problem: nu_1 must be positive");
    }
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        if (!(nu[j] >= 0.0)) {
            throw InvalidParameter("multi-term problem: coefficients must be nonnegative");
        }
        if (!(alphas[j] > 0.0 && alphas[j] <= 1.0)) {
            throw InvalidParameter("multi-term problem: orders must lie in (0, 1]");
        }
        if (j > 0 && alphas[j] > alphas[j - 1]) {
            throw InvalidParameter("multi-term problem: orders must be nonincreasing");
        }
    }
    if (!rhs) {
        throw InvalidParameter("multi-term problem: missing right-hand side");
    }
    if (!(T > 0.0) || !std::isfinite(y0)) {
        throw InvalidParameter("multi-term problem: need T > 0 and finite y0");
    }
}

std::size_t step_count(double T, double tau) {
    if (!(tau > 0.0) || !(T > 0.0)) {
        throw InvalidParameter("step_count: T and tau must be positive");
    }
    const double ratio = T / tau;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
        throw InvalidParameter("step_count: tau = " + std::to_string(tau) +
                               " does not divide T = " + std::to_string(T));
    }
    return static_cast<std::size_t>(n);
}

CorrectionSet two_term_sigma_guideline(double alpha1, double alpha2, std::size_t m) {
    return CorrectionSet::linear(m, alpha1 - alpha2, -1.0, alpha1);
}

// ---------------------------------------------------------------------------
// StartupBlock

StartupBlock::StartupBlock(const MultiTermProblem& problem, const SolverConfig& config)
    : problem_(&problem), config_(config) {
    problem.validate();
    validate_config(config);
    const auto sets = per_term_sets(problem, config);
    for (const auto& s : sets) {
        m_ = std::max(m_, s.size());
    }
    const std::size_t nT = step_count(problem.T, config.tau);
    if (m_ > nT) {
        throw InvalidParameter("startup block larger than the number of steps");
    }
    if (m_ == 0) {
        return;
    }
    const WsglHistory hist(problem, sets, config.tau, m_);
    matrix_.assign(m_, std::vector<double>(m_, 0.0));
    for (std::size_t n = 1; n <= m_; ++n) {
        for (std::size_t k = 1; k <= n; ++k) {
            matrix_[n - 1][k - 1] += hist.kernel[n - k];
        }
        for (std::size_t j = 0; j < hist.weights.size(); ++j) {
            if (hist.weights[j].m() == 0) {
                continue;
            }
            const auto w = hist.weights[j].row(n);
            for (std::size_t r = 1; r <= w.size(); ++r) {
                matrix_[n - 1][r - 1] += hist.coeff[j] * w[r - 1];
            }
        }
    }
}

std::vector<double> StartupBlock::residual(const std::vector<double>& y) const {
    std::vector<double> res(m_, 0.0);
    for (std::size_t n = 1; n <= m_; ++n) {
        double s = 0.0;
        for (std::size_t k = 1; k <= m_; ++k) {
            s += matrix_[n - 1][k - 1] * (y[k - 1] - problem_->y0);
        }
        res[n - 1] = s - problem_->rhs(static_cast<double>(n) * config_.tau, y[n - 1]);
    }
    return res;
}

std::vector<double> StartupBlock::solve() const {
    std::vector<double> y(m_, problem_->y0);
    if (m_ == 0) {
        return y;
    }
    const auto M = static_cast<Eigen::Index>(m_);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < config_.picard_max_iters; ++it) {
        Eigen::MatrixXd J(M, M);
        Eigen::VectorXd R(M);
        const auto res = residual(y);
        for (Eigen::Index n = 0; n < M; ++n) {
            for (Eigen::Index k = 0; k < M; ++k) {
                J(n, k) = matrix_[n][k];
            }
            J(n, n) -= slope(*problem_, static_cast<double>(n + 1) * config_.tau, y[n]);
            R(n) = res[n];
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        const Eigen::VectorXd delta = lu.solve(R);
        if (!delta.allFinite()) {
            throw SingularMatrixError("startup block Jacobian is singular");
        }
        double scale = 1.0;
        for (std::size_t k = 0; k < m_; ++k) {
            y[k] -= delta(static_cast<Eigen::Index>(k));
            scale = std::max(scale, std::abs(y[k]));
        }
        const double change = delta.cwiseAbs().maxCoeff();
        if (change <= config_.picard_tol * scale) {
            return y;
        }
        // Rounding floor: the update stopped shrinking at a tiny size.
        if (it >= 2 && change >= 0.5 * previous && change <= 1e-10 * scale) {
            return y;
        }
        previous = change;
    }
    throw ConvergenceError("startup block did not converge in " +
                           std::to_string(config_.picard_max_iters) + " iterations");
}

std::vector<double> StartupBlock::sweep(const std::vector<double>& y) const {
    std::vector<double> out(y);
    for (std::size_t n = 1; n <= m_; ++n) {
        double h = 0.0;
        for (std::size_t k = 1; k <= m_; ++k) {
            if (k != n) {
                h += matrix_[n - 1][k - 1] * (out[k - 1] - problem_->y0);
            }
        }
        const double d = matrix_[n - 1][n - 1];
        const double x = solve_scalar(*problem_, config_, static_cast<double>(n) * config_.tau, d,
                                      h, out[n - 1] - problem_->y0);
        out[n - 1] = problem_->y0 + x;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solvers

SampledPath solve_corrected_wsgl(const MultiTermProblem& problem, const SolverConfig& config) {
    problem.validate();
    validate_config(config);
    const std::size_t nT = step_count(problem.T, config.tau);
    const auto sets = per_term_sets(problem, config);
    const WsglHistory hist(problem, sets, config.tau, nT);

    SampledPath path;
    path.tau = config.tau;
    path.values.assign(nT + 1, problem.y0);
    std::vector<double> yhat(nT + 1, 0.0);

    const StartupBlock block(problem, config);
    const std::size_t m = block.size();
    if (m > 0) {
        const auto start = block.solve();
        for (std::size_t k = 1; k <= m; ++k) {
            path.values[k] = start[k - 1];
            yhat[k] = start[k - 1] - problem.y0;
        }
    }

    const double d = hist.kernel[0];
    const double* kern = hist.kernel.data();
    const double* yh = yhat.data();
    for (std::size_t n = m + 1; n <= nT; ++n) {
        double h = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            h += kern[n - k] * yh[k];
        }
        h += hist.correction(n, yhat);
        const double t = static_cast<double>(n) * config.tau;
        const double x = solve_scalar(problem, config, t, d, h, yhat[n - 1]);
        yhat[n] = x;
        path.values[n] = problem.y0 + x;
    }
    return path;
}

std::vector<double> l1_weights(double alpha, double tau, std::size_t K) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("l1_weights: alpha must lie in (0, 1]");
    }
    const double q = 1.0 - alpha;
    const double c = std::pow(tau, -alpha) / gamma(2.0 - alpha);
    std::vector<double> b(K + 1);
    b[0] = c;
    for (std::size_t k = 1; k <= K; ++k) {
        const double kk = static_cast<double>(k);
        // (k+1)^q - k^q = k^q expm1(q log1p(1/k))
        b[k] = c * std::pow(kk, q) * std::expm1(q * std::log1p(1.0 / kk));
    }
    return b;
}

SampledPath solve_l1(const MultiTermProblem& problem, const SolverConfig& config) {
    problem.validate();
    validate_config(config);
    const std::size_t nT = step_count(problem.T, config.tau);

    std::vector<double> B(nT + 1, 0.0);
    for (std::size_t j = 0; j < problem.terms(); ++j) {
        const auto b = l1_weights(problem.alphas[j], config.tau, nT);
        for (std::size_t k = 0; k <= nT; ++k) {
            B[k] += problem.nu[j] * b[k];
        }
    }

    SampledPath path;
    path.tau = config.tau;
    path.values.assign(nT + 1, problem.y0);
    std::vector<double> diff(nT + 1, 0.0);  // diff[k] = y^{k+1} - y^k
    const double d = B[0];
    for (std::size_t n = 1; n <= nT; ++n) {
        double h = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            h += B[i] * diff[n - 1 - i];
        }
        const double prev = path.values[n - 1] - problem.y0;
        h -= d * prev;
        const double t = static_cast<double>(n) * config.tau;
        const double x = solve_scalar(problem, config, t, d, h, prev);
        path.values[n] = problem.y0 + x;
        diff[n - 1] = path.values[n] - path.values[n - 1];
    }
    return path;
}

std::vector<double> trapezoidal_weights(double beta, double tau, std::size_t n) {
    if (!(beta > 0.0)) {
        throw InvalidParameter("trapezoidal_weights: order must be positive");
    }
    if (n < 1) {
        throw InvalidParameter("trapezoidal_weights: n must be at least 1");
    }
    const double c = std::pow(tau, beta) / gamma(2.0 + beta);
    std::vector<double> a(n + 1);
    a[0] = c * trapezoid_first_weight(beta, n);
    for (std::size_t k = 1; k < n; ++k) {
        a[k] = c * second_difference_power(beta + 1.0, n - k);
    }
    a[n] = c;
    return a;
}

SampledPath solve_trapezoidal(const MultiTermProblem& problem, const SolverConfig& config) {
    problem.validate();
    validate_config(config);
    if (problem.terms() != 2 || problem.nu[0] != 1.0 || problem.nu[1] != 1.0 ||
        !(problem.alphas[0] > problem.alphas[1])) {
        throw InvalidParameter(
            "trapezoidal rule needs a two-term problem with nu = (1, 1) and alpha_1 > alpha_2");
    }
    const std::size_t nT = step_count(problem.T, config.tau);
    const double tau = config.tau;
    const double a1 = problem.alphas[0];
    const double beta = a1 - problem.alphas[1];

    // Interior weights depend on n - k only: store c_j for j = 1..nT.
    std::vector<double> cb(nT + 1, 0.0), cf(nT + 1, 0.0);
    const double sb = std::pow(tau, beta) / gamma(2.0 + beta);
    const double sf = std::pow(tau, a1) / gamma(2.0 + a1);
    for (std::size_t j = 1; j <= nT; ++j) {
        cb[j] = sb * second_difference_power(beta + 1.0, j);
        cf[j] = sf * second_difference_power(a1 + 1.0, j);
    }

    SampledPath path;
    path.tau = tau;
    path.values.assign(nT + 1, problem.y0);
    std::vector<double> yhat(nT + 1, 0.0);
    std::vector<double> f(nT + 1, 0.0);
    f[0] = problem.rhs(0.0, problem.y0);

    const double d = (1.0 + sb) / sf;
    for (std::size_t n = 1; n <= nT; ++n) {
        double hy = 0.0;
        double hf = sf * trapezoid_first_weight(a1, n) * f[0];
        for (std::size_t k = 1; k < n; ++k) {
            hy += cb[n - k] * yhat[k];
            hf += cf[n - k] * f[k];
        }
        const double h = (hy - hf) / sf;
        const double t = static_cast<double>(n) * tau;
        const double x = solve_scalar(problem, config, t, d, h, yhat[n - 1]);
        yhat[n] = x;
        path.values[n] = problem.y0 + x;
        f[n] = problem.rhs(t, path.values[n]);
    }
    return path;
}

// ---------------------------------------------------------------------------
// Errors

namespace {

template <typename ExactAt>
ErrorReport accumulate(const SampledPath& path, ExactAt exact_at) {
    ErrorReport r;
    const std::size_t nT = path.steps();
    double sq = 0.0;
    for (std::size_t n = 0; n <= nT; ++n) {
        const double e = std::abs(exact_at(n) - path.values[n]);
        r.max_error = std::max(r.max_error, e);
        if (n >= 1) {
            sq += e * e;
        }
        if (n == nT) {
            r.final_error = e;
        }
    }
    r.avg_error = std::sqrt(path.tau * sq);
    return r;
}

}  // namespace

ErrorReport error_report(const SampledPath& path, const std::function<double(double)>& exact) {
    if (path.values.empty()) {
        throw InvalidParameter("error_report: empty path");
    }
    return accumulate(path, [&](std::size_t n) { return exact(path.time(n)); });
}

ErrorReport error_report(const SampledPath& path, const SampledPath& reference) {
    if (path.values.empty() || reference.values.empty()) {
        throw InvalidParameter("error_report: empty path");
    }
    const std::size_t n = path.steps();
    const std::size_t nr = reference.steps();
    const std::size_t ratio = n == 0 ? 1 : nr / n;
    if (ratio == 0 || ratio * n != nr ||
        std::abs(reference.tau * static_cast<double>(ratio) - path.tau) > 1e-9 * path.tau) {
        throw GridMismatchError("error_report: reference grid (tau = " +
                                std::to_string(reference.tau) + ", " + std::to_string(nr) +
                                " steps) does not refine the path grid (tau = " +
                                std::to_string(path.tau) + ", " + std::to_string(n) + " steps)");
    }
    return accumulate(path, [&](std::size_t k) { return reference.values[k * ratio]; });
}

}  // namespace fracwsgl
