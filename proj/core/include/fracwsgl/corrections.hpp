#pragma once

#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fracwsgl/glweights.hpp"

namespace fracwsgl {

/// Exponents σ_1 < σ_2 < ... < σ_m of the low-regularity terms t^{σ_r} that
/// the corrected operator integrates exactly. An empty set means no
/// correction.
class CorrectionSet {
public:
    static constexpr std::size_t kMaxTerms = 10;

    CorrectionSet() = default;

    /// Throws InvalidParameter unless the exponents are positive, strictly
    /// increasing and at most kMaxTerms in number.
    explicit CorrectionSet(std::vector<double> sigmas);

    /// σ_k = (k + index_shift) · slope + offset for k = 1..m.
    static CorrectionSet linear(std::size_t m, double slope, double index_shift = 0.0,
                                double offset = 0.0);

    std::size_t size() const { return sigmas_.size(); }
    bool empty() const { return sigmas_.empty(); }
    double operator[](std::size_t r) const { return sigmas_[r]; }
    std::span<const double> sigmas() const { return sigmas_; }

    /// The first m exponents.
    CorrectionSet prefix(std::size_t m) const;

    /// Every exponent shifted by delta (used for the time derivative of a
    /// field whose expansion is known).
    CorrectionSet shifted(double delta) const;

private:
    std::vector<double> sigmas_;
};

enum class StartingWeightKind {
    fractional,          // corrected WSGL operator
    first_derivative_u,  // averaged first difference, exponents σ_r
    first_derivative_v,  // averaged first difference, exponents σ_r - 1
};

/// Rows w_{n,1..m} of starting weights for n = 0..n_max.
///
/// Every row solves the m x m exponential Vandermonde system
/// A_{rk} = k^{σ_r}; A does not depend on n, so it is factored once (LU with
/// partial pivoting) and reused. The table is fully populated on
/// construction and immutable afterwards, so concurrent readers are safe.
class StartingWeights {
public:
    static constexpr double kIllConditioned = 1e14;

    /// Requires g.length() >= n_max.
    static StartingWeights fractional(double alpha, const CorrectionSet& set,
                                      const WSGLWeightTable& g, std::size_t n_max);
    static StartingWeights first_derivative_u(const CorrectionSet& set, std::size_t n_max);
    /// Uses the exponents σ_r - 1, which must be positive.
    static StartingWeights first_derivative_v(const CorrectionSet& set, std::size_t n_max);

    StartingWeightKind kind() const { return kind_; }
    std::size_t m() const { return m_; }
    std::size_t n_max() const { return n_max_; }

    /// Weights for step n (length m).
    std::span<const double> row(std::size_t n) const;

    /// 2-norm condition number of the Vandermonde matrix.
    double condition_number() const { return condition_; }
    bool ill_conditioned() const { return condition_ > kIllConditioned; }

    /// Largest |A w_n - b_n| over all populated rows.
    double max_residual() const { return max_residual_; }

private:
    StartingWeights(StartingWeightKind kind, std::size_t m, std::size_t n_max)
        : kind_(kind), m_(m), n_max_(n_max), rows_(m * (n_max + 1), 0.0) {}

    StartingWeightKind kind_;
    std::size_t m_;
    std::size_t n_max_;
    std::vector<double> rows_;
    double condition_ = 1.0;
    double max_residual_ = 0.0;
};

/// Solves Σ_k w_{n,k} k^{σ_r} = Γ(σ_r+1)/Γ(σ_r+1-α) n^{σ_r-α} - Σ_{k=0}^n g_{n-k} k^{σ_r}.
std::vector<double> starting_weights_fractional(double alpha, const CorrectionSet& set,
                                                const WSGLWeightTable& g, std::size_t n);

/// Solves Σ_k u_{n,k} k^{σ_r} = σ_r/2 ((n+1)^{σ_r-1} + n^{σ_r-1}) - ((n+1)^{σ_r} - n^{σ_r})
/// over the first m1 exponents.
std::vector<double> starting_weights_d1_u(const CorrectionSet& set, std::size_t m1,
                                          std::size_t n);

/// As starting_weights_d1_u with every σ_r replaced by σ_r - 1.
std::vector<double> starting_weights_d1_v(const CorrectionSet& set, std::size_t m2,
                                          std::size_t n);

/// Corrected operator τ^{-α} [Σ_{k=0}^n g_{n-k} U^k + Σ_{k=1}^m w_{n,k} U^k].
/// The path must hold samples up to max(n, m).
double corrected_wsgl_apply(const SampledPath& path, double alpha, const CorrectionSet& set,
                            std::size_t n);

struct VandermondeDiagnostics {
    double condition_number = 0.0;
    double max_residual = 0.0;
};

/// Condition number of A_{rk} = k^{σ_r} and the largest residual of the
/// fractional starting-weight system over 1 <= n <= 100.
VandermondeDiagnostics vandermonde_diagnostics(double alpha, const CorrectionSet& set);

/// S_m^σ = Π_k |σ - σ_k| (1 for an empty set).
double s_factor(double sigma, const CorrectionSet& set);

/// The corrected WSGL operator bound to a fixed step size and horizon, as used
/// by the time-stepping schemes.
///
/// apply() evaluates
///   τ^{-α} [Σ_{j=0}^{n} g_{n-j} X^j + Σ_{r=1}^{m} w_{n,r} X^r]
/// for scalar or vector-valued samples X.
class CorrectedWsglOperator {
public:
    /// `set` holds the exponents of the samples the operator acts on.
    CorrectedWsglOperator(double alpha, double tau, std::size_t n_max, const CorrectionSet& set);

    double alpha() const { return alpha_; }
    double tau() const { return tau_; }
    /// τ^{-α}
    double scale() const { return scale_; }
    std::size_t m() const { return weights_.m(); }
    std::size_t n_max() const { return weights_.n_max(); }
    const WSGLWeightTable& g() const { return g_; }
    const StartingWeights& starting_weights() const { return weights_; }

    /// Steps n >= cutoff use no correction (the "drop far field" variant).
    void set_correction_cutoff(std::size_t cutoff) { cutoff_ = cutoff; }
    bool corrected_at(std::size_t n) const { return m() > 0 && n < cutoff_; }

    /// Correction weight of sample r (1-based) at step n; zero past the cutoff.
    double correction(std::size_t n, std::size_t r) const {
        return corrected_at(n) ? weights_.row(n)[r - 1] : 0.0;
    }

    /// Needs samples 0..max(n, m).
    template <typename Value>
        requires requires(Value a, const Value& b) { a += 1.0 * b; a *= 1.0; }
    Value apply(std::span<const Value> samples, std::size_t n, Value acc) const {
        for (std::size_t j = 0; j <= n; ++j) {
            acc += g_[n - j] * samples[j];
        }
        if (corrected_at(n)) {
            const auto w = weights_.row(n);
            for (std::size_t r = 1; r <= w.size(); ++r) {
                acc += w[r - 1] * samples[r];
            }
        }
        acc *= scale_;
        return acc;
    }

private:
    double alpha_;
    double tau_;
    double scale_;
    WSGLWeightTable g_;
    StartingWeights weights_;
    std::size_t cutoff_ = std::numeric_limits<std::size_t>::max();
};

}  // namespace fracwsgl
