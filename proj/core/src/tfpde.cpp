#include "fracwsgl/tfpde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fracwsgl/errors.hpp"
#include "fracwsgl/fode.hpp"

namespace fracwsgl {
namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Vec source_at(const SpectralMesh& mesh, const SpaceTimeFunction& f, double t) {
    const auto& in = mesh.interior();
    const auto& x = mesh.coordinates();
    Vec s(static_cast<Eigen::Index>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) {
        s(static_cast<Eigen::Index>(k)) = f(x[in[k]], t);
    }
    return s;
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Tracks |R| against the largest summand that went into R.
struct ScaledResidual {
    double scale = 0.0;
    void add(const Vec& term) { scale = std::max(scale, inf_norm(term)); }
    double relative(const Vec& r) const {
        const double n = inf_norm(r);
        return scale > 0.0 ? n / scale : n;
    }
};

FieldHistory to_full(const SpectralMesh& mesh, double tau, const std::vector<Vec>& u,
                     const std::vector<Vec>& v) {
    FieldHistory h;
    h.tau = tau;
    h.u.reserve(u.size());
    for (const auto& x : u) {
        h.u.push_back(extend_interior(mesh, x));
    }
    h.v.reserve(v.size());
    for (const auto& x : v) {
        h.v.push_back(extend_interior(mesh, x));
    }
    return h;
}

std::vector<Vec> to_interior(const SpectralMesh& mesh, const std::vector<Vec>& full) {
    std::vector<Vec> out;
    out.reserve(full.size());
    for (const auto& x : full) {
        out.push_back(restrict_interior(mesh, x));
    }
    return out;
}

// Solves the affine block system R(z) = 0 by probing its columns.
template <typename Residual>
Vec solve_affine_block(std::size_t size, Residual residual) {
    const auto n = static_cast<Eigen::Index>(size);
    Vec z = Vec::Zero(n);
    const Vec r0 = residual(z);
    Mat J(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i) = 1.0;
        J.col(i) = residual(z) - r0;
        z(i) = 0.0;
    }
    Eigen::PartialPivLU<Mat> lu(J);
    Vec sol = lu.solve(-r0);
    if (!sol.allFinite()) {
        throw SingularMatrixError("startup block is singular");
    }
    // One refinement step against the rounding of the probed matrix.
    sol += lu.solve(-residual(sol));
    if (!sol.allFinite()) {
        throw ConvergenceError("startup block solve produced non-finite values");
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Wave discretization shared by the solver and the residual check.

class WaveScheme {
public:
    WaveScheme(const WaveProblem& p, double tau, const WaveCorrections& c, const WaveOptions& o)
        : p_(p),
          tau_(tau),
          nT_(step_count(p.T, tau)),
          corr_(c),
          opt_(o),
          forms_(p.mesh),
          M_(forms_.interior_mass()),
          S_(forms_.interior_stiffness()),
          du_(StartingWeights::first_derivative_u(c.sigmas.prefix(c.m1), nT_)),
          dv_(StartingWeights::first_derivative_v(c.sigmas.prefix(c.m2), nT_)),
          A_(p.alpha, tau, nT_, c.sigmas.prefix(c.m3).shifted(-1.0)) {
        u0_ = restrict_interior(p.mesh, h1_projection(p.phi0, p.mesh));
        v0_ = restrict_interior(p.mesh, h1_projection(p.psi0, p.mesh));
        if (opt_.source_rule == SourceRule::average) {
            f_.reserve(nT_ + 1);
            for (std::size_t n = 0; n <= nT_; ++n) {
                f_.push_back(source_at(p.mesh, p.source, static_cast<double>(n) * tau));
            }
        }
    }

    std::size_t steps() const { return nT_; }
    std::size_t dim() const { return static_cast<std::size_t>(M_.size()); }
    const Vec& u0() const { return u0_; }
    const Vec& v0() const { return v0_; }
    const Vec& M() const { return M_; }
    const Mat& S() const { return S_; }
    const CorrectedWsglOperator& A() const { return A_; }
    const StartingWeights& du() const { return du_; }
    const StartingWeights& dv() const { return dv_; }

    Vec source_half(std::size_t n) const {
        if (opt_.source_rule == SourceRule::average) {
            return 0.5 * (f_[n] + f_[n + 1]);
        }
        return source_at(p_.mesh, p_.source, (static_cast<double>(n) + 0.5) * tau_);
    }

    // Σ_r u_{n,r}(u^r - u^0 - t_r v^0).
    Vec u_correction(std::size_t n, const std::vector<Vec>& u) const {
        Vec s = Vec::Zero(M_.size());
        const auto w = du_.row(n);
        for (std::size_t r = 1; r <= w.size(); ++r) {
            s += w[r - 1] * (u[r] - u0_ - (static_cast<double>(r) * tau_) * v0_);
        }
        return s;
    }

    // Σ_r v_{n,r}(v^r - v^0).
    Vec v_correction(std::size_t n, const std::vector<Vec>& v) const {
        Vec s = Vec::Zero(M_.size());
        const auto w = dv_.row(n);
        for (std::size_t r = 1; r <= w.size(); ++r) {
            s += w[r - 1] * (v[r] - v0_);
        }
        return s;
    }

    // Corrected operator at step k on v̂ = v - v^0.
    Vec fractional(std::size_t k, const std::vector<Vec>& v) const {
        Vec acc = Vec::Zero(M_.size());
        const auto& g = A_.g();
        for (std::size_t j = 1; j <= k; ++j) {
            acc += g[k - j] * (v[j] - v0_);
        }
        for (std::size_t r = 1; r <= A_.m(); ++r) {
            acc += A_.correction(k, r) * (v[r] - v0_);
        }
        return A_.scale() * acc;
    }

    // Residuals of the V and U equations for the step n -> n+1.
    std::pair<Vec, Vec> residual(std::size_t n, const std::vector<Vec>& u,
                                 const std::vector<Vec>& v, ScaledResidual* sv = nullptr,
                                 ScaledResidual* su = nullptr) const {
        const double inv = 1.0 / tau_;
        const Vec t1 = M_.cwiseProduct(inv * (v[n + 1] - v[n]));
        const Vec t2 = M_.cwiseProduct(inv * v_correction(n, v));
        const Vec t3 = M_.cwiseProduct(0.5 * p_.nu * (fractional(n + 1, v) + fractional(n, v)));
        const Vec t4 = 0.5 * p_.mu * (S_ * (u[n + 1] + u[n]));
        const Vec t5 = M_.cwiseProduct(source_half(n));
        const Vec rv = t1 + t2 + t3 + t4 - t5;

        const Vec s1 = S_ * (inv * (u[n + 1] - u[n]));
        const Vec s2 = S_ * (inv * u_correction(n, u));
        const Vec s3 = S_ * (0.5 * (v[n + 1] + v[n]));
        const Vec ru = s1 + s2 - s3;
        if (sv != nullptr) {
            for (const Vec* t : {&t1, &t2, &t3, &t4, &t5}) {
                sv->add(*t);
            }
        }
        if (su != nullptr) {
            for (const Vec* t : {&s1, &s2, &s3}) {
                su->add(*t);
            }
        }
        return {rv, ru};
    }

private:
    const WaveProblem& p_;
    double tau_;
    std::size_t nT_;
    WaveCorrections corr_;
    WaveOptions opt_;
    AssembledForms forms_;
    Vec M_;
    Mat S_;
    StartingWeights du_;
    StartingWeights dv_;
    CorrectedWsglOperator A_;
    Vec u0_;
    Vec v0_;
    std::vector<Vec> f_;
};

void validate_wave_corrections(const WaveCorrections& c) {
    const std::size_t m = c.startup();
    if (c.sigmas.size() < m) {
        throw InvalidParameter("wave corrections: need at least " + std::to_string(m) +
                               " exponents");
    }
    if (m > 0 && !(c.sigmas[0] > 1.0)) {
        throw InvalidParameter("wave corrections: exponents must exceed 1");
    }
    if (c.m1 > 0 && c.sigmas[c.m1 - 1] > 3.0) {
        throw InvalidParameter("wave corrections: sigma_{m1} must not exceed 3");
    }
    if ((c.m2 > 0 && c.sigmas[c.m2 - 1] > 4.0) || (c.m3 > 0 && c.sigmas[c.m3 - 1] > 4.0)) {
        throw InvalidParameter("wave corrections: sigma_{m2} and sigma_{m3} must not exceed 4");
    }
}

// ---------------------------------------------------------------------------
// Subdiffusion discretization.

class SubdiffusionScheme {
public:
    SubdiffusionScheme(const SubdiffusionProblem& p, double tau, const SubdiffusionCorrections& c)
        : p_(p),
          tau_(tau),
          nT_(step_count(p.T, tau)),
          forms_(p.mesh),
          M_(forms_.interior_mass()),
          S_(forms_.interior_stiffness()),
          A1_(p.alpha1, tau, nT_, c.sigmas.prefix(c.m1)),
          A2_(p.alpha2, tau, nT_, c.sigmas.prefix(c.m2)) {
        if (c.drop_far_field) {
            const std::size_t cutoff = (nT_ + 4) / 5;
            A1_.set_correction_cutoff(cutoff);
            A2_.set_correction_cutoff(cutoff);
        }
        u0_ = restrict_interior(p.mesh, h1_projection(p.phi0, p.mesh));
    }

    std::size_t steps() const { return nT_; }
    std::size_t dim() const { return static_cast<std::size_t>(M_.size()); }
    std::size_t startup() const { return std::max(A1_.m(), A2_.m()); }
    const Vec& u0() const { return u0_; }
    const Vec& M() const { return M_; }
    const Mat& S() const { return S_; }
    const CorrectedWsglOperator& A1() const { return A1_; }
    const CorrectedWsglOperator& A2() const { return A2_; }
    Vec source(std::size_t n) const {
        return source_at(p_.mesh, p_.source, static_cast<double>(n) * tau_);
    }

    Vec fractional(const CorrectedWsglOperator& A, std::size_t n,
                   const std::vector<Vec>& u) const {
        Vec acc = Vec::Zero(M_.size());
        const auto& g = A.g();
        for (std::size_t j = 1; j <= n; ++j) {
            acc += g[n - j] * (u[j] - u0_);
        }
        for (std::size_t r = 1; r <= A.m(); ++r) {
            acc += A.correction(n, r) * (u[r] - u0_);
        }
        return A.scale() * acc;
    }

    Vec residual(std::size_t n, const std::vector<Vec>& u, ScaledResidual* sc = nullptr) const {
        const Vec t1 = M_.cwiseProduct(fractional(A1_, n, u));
        const Vec t2 = M_.cwiseProduct(p_.nu * fractional(A2_, n, u));
        const Vec t3 = p_.mu * (S_ * u[n]);
        const Vec t4 = M_.cwiseProduct(source(n));
        if (sc != nullptr) {
            for (const Vec* t : {&t1, &t2, &t3, &t4}) {
                sc->add(*t);
            }
        }
        return t1 + t2 + t3 - t4;
    }

private:
    const SubdiffusionProblem& p_;
    double tau_;
    std::size_t nT_;
    AssembledForms forms_;
    Vec M_;
    Mat S_;
    CorrectedWsglOperator A1_;
    CorrectedWsglOperator A2_;
    Vec u0_;
};

void validate_subdiffusion_corrections(const SubdiffusionCorrections& c) {
    if (c.sigmas.size() < std::max(c.m1, c.m2)) {
        throw InvalidParameter("subdiffusion corrections: not enough exponents for m1/m2");
    }
    if (std::max(c.m1, c.m2) > CorrectionSet::kMaxTerms) {
        throw InvalidParameter("subdiffusion corrections: at most 10 terms");
    }
}

std::size_t reference_ratio(const FieldHistory& h, const FieldHistory& ref) {
    const std::size_t n = h.steps();
    const std::size_t nr = ref.steps();
    const std::size_t ratio = n == 0 ? 1 : nr / n;
    if (h.u.empty() || ref.u.empty() || ratio == 0 || ratio * n != nr ||
        std::abs(ref.tau * static_cast<double>(ratio) - h.tau) > 1e-9 * h.tau) {
        throw GridMismatchError("reference history (tau = " + std::to_string(ref.tau) +
                                ") does not refine the history grid (tau = " +
                                std::to_string(h.tau) + ")");
    }
    return ratio;
}

}  // namespace

// ---------------------------------------------------------------------------

void WaveProblem::validate() const {
    if (!(nu >= 0.0) || !(mu > 0.0)) {
        throw InvalidParameter("wave problem: need nu >= 0 and mu > 0");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("wave problem: alpha must lie in (0, 1]");
    }
    if (!source || !phi0 || !psi0) {
        throw InvalidParameter("wave problem: missing source or initial data");
    }
    if (!(T > 0.0)) {
        throw InvalidParameter("wave problem: T must be positive");
    }
}

void SubdiffusionProblem::validate() const {
    if (!(nu >= 0.0) || !(mu > 0.0)) {
        throw InvalidParameter("subdiffusion problem: need nu >= 0 and mu > 0");
    }
    if (!(alpha1 > 0.0 && alpha1 <= 1.0 && alpha2 > 0.0 && alpha2 <= 1.0)) {
        throw InvalidParameter("subdiffusion problem: orders must lie in (0, 1]");
    }
    if (!source || !phi0) {
        throw InvalidParameter("subdiffusion problem: missing source or initial data");
    }
    if (!(T > 0.0)) {
        throw InvalidParameter("subdiffusion problem: T must be positive");
    }
}

std::size_t WaveCorrections::startup() const { return std::max({m1, m2, m3}); }

FieldHistory solve_wave(const WaveProblem& problem, double tau, const WaveCorrections& corrections,
                        const WaveOptions& options) {
    problem.validate();
    validate_wave_corrections(corrections);
    const WaveScheme scheme(problem, tau, corrections, options);
    const std::size_t nT = scheme.steps();
    const std::size_t d = scheme.dim();
    const std::size_t m = corrections.startup();
    if (m > nT) {
        throw InvalidParameter("solve_wave: startup block longer than the time horizon");
    }

    std::vector<Vec> u(nT + 1, Vec::Zero(static_cast<Eigen::Index>(d)));
    std::vector<Vec> v(nT + 1, Vec::Zero(static_cast<Eigen::Index>(d)));
    u[0] = scheme.u0();
    v[0] = scheme.v0();

    if (m > 0) {
        const auto di = static_cast<Eigen::Index>(d);
        auto unpack = [&](const Vec& z) {
            for (std::size_t k = 1; k <= m; ++k) {
                u[k] = z.segment(static_cast<Eigen::Index>(k - 1) * di, di);
                v[k] = z.segment(static_cast<Eigen::Index>(m + k - 1) * di, di);
            }
        };
        const Vec z = solve_affine_block(2 * m * d, [&](const Vec& zz) {
            unpack(zz);
            Vec r(zz.size());
            for (std::size_t n = 0; n < m; ++n) {
                auto [rv, ru] = scheme.residual(n, u, v);
                r.segment(static_cast<Eigen::Index>(n) * di, di) = rv;
                r.segment(static_cast<Eigen::Index>(m + n) * di, di) = ru;
            }
            return r;
        });
        unpack(z);
    }

    const auto& A = scheme.A();
    const auto& g = A.g();
    const double g0 = g[0];
    const double nu = problem.nu;
    const double mu = problem.mu;
    const double shift = nu * std::pow(tau, 1.0 - problem.alpha) * g0 / 2.0;
    Mat L = (mu * tau * tau / 4.0) * scheme.S();
    L.diagonal() += (1.0 + shift) * scheme.M();
    Eigen::LLT<Mat> llt(L);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("solve_wave: step matrix is not positive definite");
    }

    // k_j = g_{n+1-j} + g_{n-j} read from a reversed table.
    Vec crev(static_cast<Eigen::Index>(std::max<std::size_t>(nT, 1)));
    for (std::size_t i = 0; i < nT; ++i) {
        crev(static_cast<Eigen::Index>(nT - 1 - i)) = g[i + 1] + g[i];
    }
    Mat vhat = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(nT + 1));
    for (std::size_t k = 1; k <= m; ++k) {
        vhat.col(static_cast<Eigen::Index>(k)) = v[k] - v[0];
    }

    for (std::size_t n = m; n < nT; ++n) {
        const Vec ustar = u[n] + (0.5 * tau) * v[n] - scheme.u_correction(n, u);
        Vec frac = vhat.leftCols(static_cast<Eigen::Index>(n + 1)) *
                   crev.segment(static_cast<Eigen::Index>(nT - 1 - n),
                                static_cast<Eigen::Index>(n + 1));
        frac -= g0 * v[0];
        for (std::size_t r = 1; r <= A.m(); ++r) {
            frac += (A.correction(n + 1, r) + A.correction(n, r)) *
                    vhat.col(static_cast<Eigen::Index>(r));
        }
        frac *= A.scale();
        const Vec inner = -v[n] / tau + scheme.v_correction(n, v) / tau + (0.5 * nu) * frac -
                          scheme.source_half(n);
        const Vec r0 = scheme.M().cwiseProduct(inner) + (0.5 * mu) * (scheme.S() * (ustar + u[n]));
        v[n + 1] = -tau * llt.solve(r0);
        u[n + 1] = ustar + (0.5 * tau) * v[n + 1];
        vhat.col(static_cast<Eigen::Index>(n + 1)) = v[n + 1] - v[0];
    }
    return to_full(problem.mesh, tau, u, v);
}

std::vector<double> wave_scheme_residuals(const WaveProblem& problem, double tau,
                                          const WaveCorrections& corrections,
                                          const FieldHistory& history,
                                          const WaveOptions& options) {
    problem.validate();
    const WaveScheme scheme(problem, tau, corrections, options);
    if (history.steps() != scheme.steps() || history.v.size() != history.u.size()) {
        throw GridMismatchError("wave_scheme_residuals: history does not match the step count");
    }
    const auto u = to_interior(problem.mesh, history.u);
    const auto v = to_interior(problem.mesh, history.v);
    std::vector<double> out;
    out.reserve(scheme.steps());
    for (std::size_t n = 0; n < scheme.steps(); ++n) {
        ScaledResidual sv, su;
        auto [rv, ru] = scheme.residual(n, u, v, &sv, &su);
        out.push_back(std::max(sv.relative(rv), su.relative(ru)));
    }
    return out;
}

FieldHistory solve_wave_l1_baseline(const WaveProblem& problem, double tau,
                                    const WaveOptions& options) {
    problem.validate();
    const WaveScheme scheme(problem, tau, WaveCorrections{}, options);
    const std::size_t nT = scheme.steps();
    const std::size_t d = scheme.dim();
    const auto b = l1_weights(problem.alpha, tau, nT);
    const double nu = problem.nu;
    const double mu = problem.mu;

    Mat L = (mu * tau * tau / 4.0) * scheme.S();
    L.diagonal() += (1.0 + nu * tau * b[0] / 2.0) * scheme.M();
    Eigen::LLT<Mat> llt(L);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("solve_wave_l1_baseline: step matrix is not positive definite");
    }

    // e_i = b_{i+1} + b_i, reversed.
    Vec erev(static_cast<Eigen::Index>(std::max<std::size_t>(nT, 1)));
    for (std::size_t i = 0; i < nT; ++i) {
        erev(static_cast<Eigen::Index>(nT - 1 - i)) = b[i + 1] + b[i];
    }
    std::vector<Vec> u(nT + 1), v(nT + 1);
    u[0] = scheme.u0();
    v[0] = scheme.v0();
    Mat diff = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(nT));
    for (std::size_t n = 0; n < nT; ++n) {
        const Vec ustar = u[n] + (0.5 * tau) * v[n];
        Vec frac = -b[0] * v[n];
        if (n > 0) {
            frac += diff.leftCols(static_cast<Eigen::Index>(n)) *
                    erev.segment(static_cast<Eigen::Index>(nT - n), static_cast<Eigen::Index>(n));
        }
        const Vec inner = -v[n] / tau + (0.5 * nu) * frac - scheme.source_half(n);
        const Vec r0 = scheme.M().cwiseProduct(inner) + (0.5 * mu) * (scheme.S() * (ustar + u[n]));
        v[n + 1] = -tau * llt.solve(r0);
        u[n + 1] = ustar + (0.5 * tau) * v[n + 1];
        diff.col(static_cast<Eigen::Index>(n)) = v[n + 1] - v[n];
    }
    return to_full(problem.mesh, tau, u, v);
}

FieldHistory solve_subdiffusion(const SubdiffusionProblem& problem, double tau,
                                const SubdiffusionCorrections& corrections) {
    problem.validate();
    validate_subdiffusion_corrections(corrections);
    const SubdiffusionScheme scheme(problem, tau, corrections);
    const std::size_t nT = scheme.steps();
    const std::size_t d = scheme.dim();
    const std::size_t m = scheme.startup();
    if (m > nT) {
        throw InvalidParameter("solve_subdiffusion: startup block longer than the time horizon");
    }
    const auto di = static_cast<Eigen::Index>(d);

    std::vector<Vec> u(nT + 1, Vec::Zero(di));
    u[0] = scheme.u0();
    if (m > 0) {
        auto unpack = [&](const Vec& z) {
            for (std::size_t k = 1; k <= m; ++k) {
                u[k] = z.segment(static_cast<Eigen::Index>(k - 1) * di, di);
            }
        };
        const Vec z = solve_affine_block(m * d, [&](const Vec& zz) {
            unpack(zz);
            Vec r(zz.size());
            for (std::size_t n = 1; n <= m; ++n) {
                r.segment(static_cast<Eigen::Index>(n - 1) * di, di) = scheme.residual(n, u);
            }
            return r;
        });
        unpack(z);
    }

    const auto& A1 = scheme.A1();
    const auto& A2 = scheme.A2();
    const double s1 = A1.scale();
    const double s2 = problem.nu * A2.scale();
    Vec krev(static_cast<Eigen::Index>(nT + 1));
    for (std::size_t i = 0; i <= nT; ++i) {
        krev(static_cast<Eigen::Index>(nT - i)) = s1 * A1.g()[i] + s2 * A2.g()[i];
    }
    const double k0 = s1 * A1.g()[0] + s2 * A2.g()[0];
    Mat L = problem.mu * scheme.S();
    L.diagonal() += k0 * scheme.M();
    Eigen::LLT<Mat> llt(L);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("solve_subdiffusion: step matrix is not positive definite");
    }

    Mat uhat = Mat::Zero(di, static_cast<Eigen::Index>(nT + 1));
    for (std::size_t k = 1; k <= m; ++k) {
        uhat.col(static_cast<Eigen::Index>(k)) = u[k] - u[0];
    }
    const std::size_t mc = std::max(A1.m(), A2.m());
    for (std::size_t n = m + 1; n <= nT; ++n) {
        Vec hist = uhat.leftCols(static_cast<Eigen::Index>(n)) *
                   krev.segment(static_cast<Eigen::Index>(nT - n), static_cast<Eigen::Index>(n));
        for (std::size_t r = 1; r <= mc; ++r) {
            const double w = (r <= A1.m() ? s1 * A1.correction(n, r) : 0.0) +
                             (r <= A2.m() ? s2 * A2.correction(n, r) : 0.0);
            if (w != 0.0) {
                hist += w * uhat.col(static_cast<Eigen::Index>(r));
            }
        }
        const Vec rhs = scheme.M().cwiseProduct(scheme.source(n) - hist + k0 * u[0]);
        u[n] = llt.solve(rhs);
        uhat.col(static_cast<Eigen::Index>(n)) = u[n] - u[0];
    }
    return to_full(problem.mesh, tau, u, {});
}

std::vector<double> subdiffusion_scheme_residuals(const SubdiffusionProblem& problem, double tau,
                                                  const SubdiffusionCorrections& corrections,
                                                  const FieldHistory& history) {
    problem.validate();
    const SubdiffusionScheme scheme(problem, tau, corrections);
    if (history.steps() != scheme.steps()) {
        throw GridMismatchError(
            "subdiffusion_scheme_residuals: history does not match the step count");
    }
    const auto u = to_interior(problem.mesh, history.u);
    std::vector<double> out;
    out.reserve(scheme.steps());
    for (std::size_t n = 1; n <= scheme.steps(); ++n) {
        ScaledResidual sc;
        const Vec r = scheme.residual(n, u, &sc);
        out.push_back(sc.relative(r));
    }
    return out;
}

FieldHistory solve_subdiffusion_l1_baseline(const SubdiffusionProblem& problem, double tau) {
    problem.validate();
    const SubdiffusionScheme scheme(problem, tau, SubdiffusionCorrections{});
    const std::size_t nT = scheme.steps();
    const auto di = static_cast<Eigen::Index>(scheme.dim());
    const auto b1 = l1_weights(problem.alpha1, tau, nT);
    const auto b2 = l1_weights(problem.alpha2, tau, nT);
    std::vector<double> B(nT + 1);
    for (std::size_t k = 0; k <= nT; ++k) {
        B[k] = b1[k] + problem.nu * b2[k];
    }
    Vec brev(static_cast<Eigen::Index>(nT + 1));
    for (std::size_t i = 0; i <= nT; ++i) {
        brev(static_cast<Eigen::Index>(nT - i)) = B[i];
    }
    Mat L = problem.mu * scheme.S();
    L.diagonal() += B[0] * scheme.M();
    Eigen::LLT<Mat> llt(L);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("solve_subdiffusion_l1_baseline: step matrix is singular");
    }

    std::vector<Vec> u(nT + 1);
    u[0] = scheme.u0();
    Mat diff = Mat::Zero(di, static_cast<Eigen::Index>(std::max<std::size_t>(nT, 1)));
    for (std::size_t n = 1; n <= nT; ++n) {
        Vec hist = -B[0] * u[n - 1];
        if (n >= 2) {
            // Σ_{k=0}^{n-2} B_{n-1-k} (u^{k+1} - u^k)
            hist += diff.leftCols(static_cast<Eigen::Index>(n - 1)) *
                    brev.segment(static_cast<Eigen::Index>(nT - n + 1),
                                 static_cast<Eigen::Index>(n - 1));
        }
        u[n] = llt.solve(scheme.M().cwiseProduct(scheme.source(n) - hist));
        diff.col(static_cast<Eigen::Index>(n - 1)) = u[n] - u[n - 1];
    }
    return to_full(problem.mesh, tau, u, {});
}

// ---------------------------------------------------------------------------
// Errors and output

double l2_error(const FieldHistory& history, const SpectralMesh& mesh, std::size_t n,
                const SpaceTimeFunction& exact) {
    if (n > history.steps()) {
        throw IndexRangeError("l2_error: step " + std::to_string(n) + " beyond the history");
    }
    const double t = history.time(n);
    return l2_error(mesh, history.u[n], [&](double x) { return exact(x, t); });
}

double l2_error(const FieldHistory& history, const FieldHistory& reference,
                const SpectralMesh& mesh, std::size_t n) {
    const std::size_t ratio = reference_ratio(history, reference);
    if (n > history.steps()) {
        throw IndexRangeError("l2_error: step " + std::to_string(n) + " beyond the history");
    }
    return l2_norm(mesh, history.u[n] - reference.u[n * ratio]);
}

double average_l2_error(const FieldHistory& history, const SpectralMesh& mesh,
                        const SpaceTimeFunction& exact) {
    double sum = 0.0;
    for (std::size_t n = 0; n <= history.steps(); ++n) {
        const double e = l2_error(history, mesh, n, exact);
        sum += e * e;
    }
    return std::sqrt(history.tau * sum);
}

double average_l2_error(const FieldHistory& history, const FieldHistory& reference,
                        const SpectralMesh& mesh) {
    const std::size_t ratio = reference_ratio(history, reference);
    double sum = 0.0;
    for (std::size_t n = 0; n <= history.steps(); ++n) {
        const double e = l2_norm(mesh, history.u[n] - reference.u[n * ratio]);
        sum += e * e;
    }
    return std::sqrt(history.tau * sum);
}

double wave_energy(const FieldHistory& history, const AssembledForms& forms, double mu,
                   std::size_t n) {
    if (n > history.steps() || history.v.size() != history.u.size()) {
        throw IndexRangeError("wave_energy: step outside the history");
    }
    return forms.mass_form(history.v[n], history.v[n]) +
           mu * forms.stiffness_form(history.u[n], history.u[n]);
}

void write_history_csv(std::ostream& out, const FieldHistory& history, const SpectralMesh& mesh) {
    const auto old_precision = out.precision(17);
    out << "field,t";
    for (double x : mesh.coordinates()) {
        out << ',' << x;
    }
    out << '\n';
    auto rows = [&](const char* name, const std::vector<Vec>& fields) {
        for (std::size_t n = 0; n < fields.size(); ++n) {
            out << name << ',' << history.time(n);
            for (Eigen::Index k = 0; k < fields[n].size(); ++k) {
                out << ',' << fields[n](k);
            }
            out << '\n';
        }
    };
    rows("u", history.u);
    rows("v", history.v);
    out.precision(old_precision);
}

}  // namespace fracwsgl
