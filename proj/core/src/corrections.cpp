#include "fracwsgl/corrections.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/specfun.hpp"

namespace fracwsgl {
namespace {

Eigen::MatrixXd vandermonde(std::span<const double> exponents) {
    const auto m = static_cast<Eigen::Index>(exponents.size());
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index k = 0; k < m; ++k) {
            a(r, k) = std::pow(static_cast<double>(k + 1), exponents[r]);
        }
    }
    return a;
}

double condition_2norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) {
        return 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    if (smallest == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / smallest;
}

// Factored Vandermonde system shared by every row of a StartingWeights table.
struct VandermondeSolver {
    explicit VandermondeSolver(std::span<const double> exponents)
        : matrix(vandermonde(exponents)), condition(condition_2norm(matrix)) {
        if (!std::isfinite(condition)) {
            throw SingularMatrixError("starting weights: Vandermonde matrix is singular");
        }
        lu.compute(matrix);
    }

    // Solves into `out` and returns the max-norm residual.
    double solve(const Eigen::VectorXd& rhs, std::span<double> out) const {
        Eigen::VectorXd w = lu.solve(rhs);
        for (int it = 0; it < 3; ++it) {
            Eigen::VectorXd r(rhs.size());
            for (Eigen::Index i = 0; i < rhs.size(); ++i) {
                long double acc = rhs(i);
                for (Eigen::Index k = 0; k < w.size(); ++k) {
                    acc -= static_cast<long double>(matrix(i, k)) * w(k);
                }
                r(i) = static_cast<double>(acc);
            }
            w += lu.solve(r);
        }
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            out[static_cast<std::size_t>(k)] = w(k);
        }
        return (matrix * w - rhs).cwiseAbs().maxCoeff();
    }

    Eigen::MatrixXd matrix;
    double condition;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

// Right-hand side of the averaged first-difference system for exponent e:
//   e/2 ((n+1)^{e-1} + n^{e-1}) - ((n+1)^e - n^e).
double first_derivative_rhs(double e, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double value =
        0.5 * e * (std::pow(nn + 1.0, e - 1.0) + std::pow(nn, e - 1.0)) -
        (std::pow(nn + 1.0, e) - std::pow(nn, e));
    if (!std::isfinite(value)) {
        throw DomainError("first-derivative starting weights: exponent " + std::to_string(e) +
                          " is singular at n = " + std::to_string(n));
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// CorrectionSet

CorrectionSet::CorrectionSet(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.size() > kMaxTerms) {
        throw InvalidParameter("CorrectionSet: at most " + std::to_string(kMaxTerms) +
                               " correction terms are supported");
    }
    for (std::size_t r = 0; r < sigmas_.size(); ++r) {
        if (!(sigmas_[r] > 0.0) || !std::isfinite(sigmas_[r])) {
            throw InvalidParameter("CorrectionSet: exponents must be positive and finite");
        }
        if (r > 0 && !(sigmas_[r] > sigmas_[r - 1])) {
            throw InvalidParameter("CorrectionSet: exponents must be strictly increasing");
        }
    }
}

CorrectionSet CorrectionSet::linear(std::size_t m, double slope, double index_shift,
                                    double offset) {
    std::vector<double> s(m);
    for (std::size_t k = 1; k <= m; ++k) {
        s[k - 1] = (static_cast<double>(k) + index_shift) * slope + offset;
    }
    return CorrectionSet(std::move(s));
}

CorrectionSet CorrectionSet::prefix(std::size_t m) const {
    if (m > sigmas_.size()) {
        throw InvalidParameter("CorrectionSet::prefix: set holds only " +
                               std::to_string(sigmas_.size()) + " exponents");
    }
    return CorrectionSet(std::vector<double>(sigmas_.begin(), sigmas_.begin() + m));
}

CorrectionSet CorrectionSet::shifted(double delta) const {
    std::vector<double> s(sigmas_);
    for (double& v : s) {
        v += delta;
    }
    return CorrectionSet(std::move(s));
}

// ---------------------------------------------------------------------------
// StartingWeights

std::span<const double> StartingWeights::row(std::size_t n) const {
    if (n > n_max_) {
        throw IndexRangeError("StartingWeights::row: step " + std::to_string(n) +
                              " exceeds the populated range " + std::to_string(n_max_));
    }
    return std::span<const double>(rows_).subspan(n * m_, m_);
}

StartingWeights StartingWeights::fractional(double alpha, const CorrectionSet& set,
                                            const WSGLWeightTable& g, std::size_t n_max) {
    const std::size_t m = set.size();
    StartingWeights table(StartingWeightKind::fractional, m, n_max);
    if (m == 0) {
        return table;
    }
    if (g.length() < n_max) {
        throw InvalidParameter("StartingWeights::fractional: weight table shorter than n_max");
    }
    const VandermondeSolver solver(set.sigmas());
    table.condition_ = solver.condition;

    // powers[r][k] = k^{σ_r}, shared by every row's convolution. The
    // convolution cancels against the exact term, hence long double.
    std::vector<std::vector<long double>> powers(m, std::vector<long double>(n_max + 1));
    std::vector<long double> ratio(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k <= n_max; ++k) {
            powers[r][k] = std::pow(static_cast<long double>(k), static_cast<long double>(set[r]));
        }
        ratio[r] = gamma(set[r] + 1.0) / gamma(set[r] + 1.0 - alpha);
    }

    const auto gw = g.weights();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    // Row 0 stays zero: the operator acts on samples that vanish at t = 0.
    for (std::size_t n = 1; n <= n_max; ++n) {
        for (std::size_t r = 0; r < m; ++r) {
            long double conv = 0.0L;
            for (std::size_t k = 1; k <= n; ++k) {
                conv += gw[n - k] * powers[r][k];
            }
            const long double exact =
                ratio[r] * std::pow(static_cast<long double>(n), static_cast<long double>(set[r] - alpha));
            rhs(static_cast<Eigen::Index>(r)) = static_cast<double>(exact - conv);
        }
        const double res = solver.solve(rhs, std::span<double>(table.rows_).subspan(n * m, m));
        table.max_residual_ = std::max(table.max_residual_, res);
    }
    return table;
}

namespace {

void build_first_derivative(const CorrectionSet& exponents, std::size_t n_max,
                            double& condition, double& max_residual, std::vector<double>& rows) {
    const std::size_t m = exponents.size();
    if (m == 0) {
        return;
    }
    const VandermondeSolver solver(exponents.sigmas());
    condition = solver.condition;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (std::size_t n = 0; n <= n_max; ++n) {
        for (std::size_t r = 0; r < m; ++r) {
            rhs(static_cast<Eigen::Index>(r)) = first_derivative_rhs(exponents[r], n);
        }
        const double res = solver.solve(rhs, std::span<double>(rows).subspan(n * m, m));
        max_residual = std::max(max_residual, res);
    }
}

}  // namespace

StartingWeights StartingWeights::first_derivative_u(const CorrectionSet& set, std::size_t n_max) {
    StartingWeights table(StartingWeightKind::first_derivative_u, set.size(), n_max);
    build_first_derivative(set, n_max, table.condition_, table.max_residual_, table.rows_);
    return table;
}

StartingWeights StartingWeights::first_derivative_v(const CorrectionSet& set, std::size_t n_max) {
    StartingWeights table(StartingWeightKind::first_derivative_v, set.size(), n_max);
    if (!set.empty() && !(set[0] > 1.0)) {
        throw InvalidParameter(
            "first-derivative (V) starting weights need exponents sigma_r > 1");
    }
    const CorrectionSet reduced = set.empty() ? CorrectionSet() : set.shifted(-1.0);
    build_first_derivative(reduced, n_max, table.condition_, table.max_residual_, table.rows_);
    return table;
}

// ---------------------------------------------------------------------------
// Free functions

std::vector<double> starting_weights_fractional(double alpha, const CorrectionSet& set,
                                                const WSGLWeightTable& g, std::size_t n) {
    if (set.empty()) {
        return {};
    }
    if (n < 1) {
        throw InvalidParameter("starting_weights_fractional: n must be at least 1");
    }
    const auto table = StartingWeights::fractional(alpha, set, g, n);
    const auto row = table.row(n);
    return {row.begin(), row.end()};
}

std::vector<double> starting_weights_d1_u(const CorrectionSet& set, std::size_t m1,
                                          std::size_t n) {
    const auto table = StartingWeights::first_derivative_u(set.prefix(m1), n);
    const auto row = table.row(n);
    return {row.begin(), row.end()};
}

std::vector<double> starting_weights_d1_v(const CorrectionSet& set, std::size_t m2,
                                          std::size_t n) {
    const auto table = StartingWeights::first_derivative_v(set.prefix(m2), n);
    const auto row = table.row(n);
    return {row.begin(), row.end()};
}

double corrected_wsgl_apply(const SampledPath& path, double alpha, const CorrectionSet& set,
                            std::size_t n) {
    if (n < 1) {
        throw InvalidParameter("corrected_wsgl_apply: n must be at least 1");
    }
    const std::size_t needed = std::max(n, set.size());
    if (path.values.empty() || needed > path.steps()) {
        throw IndexRangeError("corrected_wsgl_apply: path must hold samples up to " +
                              std::to_string(needed));
    }
    const CorrectedWsglOperator op(alpha, path.tau, n, set);
    return op.apply(std::span<const double>(path.values), n, 0.0);
}

VandermondeDiagnostics vandermonde_diagnostics(double alpha, const CorrectionSet& set) {
    if (set.empty()) {
        throw InvalidParameter("vandermonde_diagnostics: need at least one exponent");
    }
    constexpr std::size_t kSteps = 100;
    const WSGLWeightTable g(alpha, kSteps);
    const auto table = StartingWeights::fractional(alpha, set, g, kSteps);
    return {table.condition_number(), table.max_residual()};
}

double s_factor(double sigma, const CorrectionSet& set) {
    double product = 1.0;
    for (double s : set.sigmas()) {
        product *= std::abs(sigma - s);
    }
    return product;
}

// ---------------------------------------------------------------------------
// CorrectedWsglOperator

CorrectedWsglOperator::CorrectedWsglOperator(double alpha, double tau, std::size_t n_max,
                                             const CorrectionSet& set)
    : alpha_(alpha),
      tau_(tau),
      scale_(std::pow(tau, -alpha)),
      g_(alpha, std::max<std::size_t>(n_max, 1)),
      weights_(StartingWeights::fractional(alpha, set, g_, n_max)) {}

}  // namespace fracwsgl
