#include "fracwsgl/sem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracwsgl/errors.hpp"

namespace fracwsgl {

LegendreValue legendre(std::size_t N, double x) {
    if (N == 0) {
        return {1.0, 0.0};
    }
    double p0 = 1.0;
    double p1 = x;
    double d0 = 0.0;
    double d1 = 1.0;
    for (std::size_t k = 2; k <= N; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        const double d2 = d0 + (2.0 * kk - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return {p1, d1};
}

QuadratureRule lgl_nodes(std::size_t N) {
    if (N == 0) {
        throw InvalidParameter("lgl_nodes: degree must be at least 1");
    }
    const double nn = static_cast<double>(N);
    std::vector<double> x(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        x[j] = -std::cos(std::numbers::pi * static_cast<double>(j) / nn);
    }
    // Newton on (1 - x^2) P_N'(x) written through the three-term recurrence:
    // x <- x - (x P_N - P_{N-1}) / ((N + 1) P_N).
    for (std::size_t j = 0; j <= N; ++j) {
        for (int it = 0; it < 50; ++it) {
            const double pN = legendre(N, x[j]).p;
            const double pN1 = legendre(N - 1, x[j]).p;
            const double dx = (x[j] * pN - pN1) / ((nn + 1.0) * pN);
            x[j] -= dx;
            if (std::abs(dx) <= 1e-15) {
                break;
            }
        }
    }
    QuadratureRule rule;
    rule.nodes.resize(N + 1);
    rule.weights.resize(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        rule.nodes[j] = 0.5 * (x[j] - x[N - j]);
    }
    rule.nodes.front() = -1.0;
    rule.nodes.back() = 1.0;
    if (N % 2 == 0) {
        rule.nodes[N / 2] = 0.0;
    }
    for (std::size_t j = 0; j <= N; ++j) {
        const double p = legendre(N, rule.nodes[j]).p;
        rule.weights[j] = 2.0 / (nn * (nn + 1.0) * p * p);
    }
    return rule;
}

QuadratureRule gauss_legendre(std::size_t n) {
    if (n == 0) {
        throw InvalidParameter("gauss_legendre: need at least one point");
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
        LegendreValue v{};
        for (int it = 0; it < 100; ++it) {
            v = legendre(n, x);
            const double dx = v.p / v.dp;
            x -= dx;
            if (std::abs(dx) <= 1e-16) {
                break;
            }
        }
        v = legendre(n, x);
        const double w = 2.0 / ((1.0 - x * x) * v.dp * v.dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> lambda(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j) {
                lambda[j] *= nodes[j] - nodes[k];
            }
        }
        lambda[j] = 1.0 / lambda[j];
    }
    return lambda;
}

Eigen::MatrixXd differentiation_matrix(const std::vector<double>& nodes) {
    const auto n = static_cast<Eigen::Index>(nodes.size());
    const auto lambda = barycentric_weights(nodes);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                D(i, j) = (lambda[j] / lambda[i]) / (nodes[i] - nodes[j]);
                diag -= D(i, j);
            }
        }
        D(i, i) = diag;
    }
    return D;
}

Eigen::MatrixXd interpolation_matrix(const std::vector<double>& nodes,
                                     const std::vector<double>& points) {
    const auto lambda = barycentric_weights(nodes);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), n);
    for (std::size_t q = 0; q < points.size(); ++q) {
        const auto row = static_cast<Eigen::Index>(q);
        const double x = points[q];
        bool hit = false;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (x == nodes[j]) {
                E(row, j) = 1.0;
                hit = true;
                break;
            }
        }
        if (hit) {
            continue;
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c = lambda[j] / (x - nodes[j]);
            E(row, j) = c;
            denom += c;
        }
        E.row(row) /= denom;
    }
    return E;
}

// ---------------------------------------------------------------------------
// SpectralMesh

SpectralMesh::SpectralMesh(std::vector<double> breakpoints, std::vector<std::size_t> degrees)
    : breakpoints_(std::move(breakpoints)), degrees_(std::move(degrees)) {
    if (degrees_.empty() || breakpoints_.size() != degrees_.size() + 1) {
        throw InvalidParameter("SpectralMesh: need M >= 1 elements and M + 1 breakpoints");
    }
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i + 1] > breakpoints_[i])) {
            throw InvalidParameter("SpectralMesh: breakpoints must be strictly increasing");
        }
    }
    for (std::size_t N : degrees_) {
        if (N < 1) {
            throw InvalidParameter("SpectralMesh: element degrees must be at least 1");
        }
    }

    std::vector<std::size_t> distinct;
    for (std::size_t N : degrees_) {
        auto it = std::find(distinct.begin(), distinct.end(), N);
        if (it == distinct.end()) {
            distinct.push_back(N);
            rule_of_.push_back(distinct.size() - 1);
        } else {
            rule_of_.push_back(static_cast<std::size_t>(it - distinct.begin()));
        }
    }
    for (std::size_t N : distinct) {
        rules_.push_back(lgl_nodes(N));
        diffs_.push_back(differentiation_matrix(rules_.back().nodes));
        barys_.push_back(barycentric_weights(rules_.back().nodes));
        norm_rules_.push_back(gauss_legendre(N + kNormQuadratureExtra));
        norm_values_.push_back(interpolation_matrix(rules_.back().nodes, norm_rules_.back().nodes));
        norm_derivs_.push_back(norm_values_.back() * diffs_.back());
    }

    offsets_.resize(degrees_.size());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < degrees_.size(); ++i) {
        offsets_[i] = offset;
        offset += degrees_[i];
    }
    coords_.resize(offset + 1);
    for (std::size_t i = 0; i < degrees_.size(); ++i) {
        const auto& xi = rule(i).nodes;
        for (std::size_t k = 0; k <= degrees_[i]; ++k) {
            coords_[offsets_[i] + k] = left(i) + 0.5 * (xi[k] + 1.0) * width(i);
        }
    }
    for (std::size_t i = 1; i < degrees_.size(); ++i) {
        coords_[offsets_[i]] = breakpoints_[i];
    }
    coords_.back() = breakpoints_.back();
    for (std::size_t g = 1; g + 1 < coords_.size(); ++g) {
        interior_.push_back(g);
    }
}

SpectralMesh SpectralMesh::uniform(double a, double b, std::size_t M, std::size_t N) {
    if (M == 0) {
        throw InvalidParameter("SpectralMesh::uniform: need at least one element");
    }
    std::vector<double> bp(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        bp[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(M);
    }
    bp.back() = b;
    return SpectralMesh(std::move(bp), std::vector<std::size_t>(M, N));
}

std::size_t SpectralMesh::locate(double x) const {
    if (x < a() || x > b()) {
        throw DomainError("SpectralMesh: point " + std::to_string(x) + " lies outside the mesh");
    }
    auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), x);
    return std::min(static_cast<std::size_t>(it - breakpoints_.begin()) - 1, elements() - 1);
}

double SpectralMesh::evaluate(const Eigen::VectorXd& coeffs, double x) const {
    const std::size_t i = locate(x);
    const double xi = 2.0 * (x - left(i)) / width(i) - 1.0;
    const Eigen::MatrixXd E = interpolation_matrix(rule(i).nodes, {xi});
    double v = 0.0;
    for (std::size_t k = 0; k <= degree(i); ++k) {
        v += E(0, static_cast<Eigen::Index>(k)) *
             coeffs(static_cast<Eigen::Index>(global_index(i, k)));
    }
    return v;
}

Eigen::VectorXd interpolate(const std::function<double(double)>& f, const SpectralMesh& mesh) {
    const auto& x = mesh.coordinates();
    Eigen::VectorXd c(static_cast<Eigen::Index>(x.size()));
    for (std::size_t g = 0; g < x.size(); ++g) {
        c(static_cast<Eigen::Index>(g)) = f(x[g]);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Assembly

AssembledForms::AssembledForms(const SpectralMesh& mesh) : mesh_(mesh) {
    const auto n = static_cast<Eigen::Index>(mesh_.dofs());
    mass_ = Eigen::VectorXd::Zero(n);
    stiffness_ = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < mesh_.elements(); ++i) {
        const double h = mesh_.width(i);
        const auto& w = mesh_.rule(i).weights;
        const Eigen::MatrixXd& D = mesh_.derivative(i);
        const std::size_t N = mesh_.degree(i);
        // LGL quadrature integrates the degree 2N-2 products ℓ_j' ℓ_k' exactly.
        const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
        const Eigen::MatrixXd Ke = (2.0 / h) * D.transpose() * wv.asDiagonal() * D;
        for (std::size_t j = 0; j <= N; ++j) {
            const auto gj = static_cast<Eigen::Index>(mesh_.global_index(i, j));
            mass_(gj) += 0.5 * h * w[j];
            for (std::size_t k = 0; k <= N; ++k) {
                const auto gk = static_cast<Eigen::Index>(mesh_.global_index(i, k));
                stiffness_(gj, gk) +=
                    Ke(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            }
        }
    }
}

Eigen::VectorXd AssembledForms::interior_mass() const {
    return restrict_interior(mesh_, mass_);
}

Eigen::MatrixXd AssembledForms::interior_stiffness() const {
    const auto& in = mesh_.interior();
    const auto n = static_cast<Eigen::Index>(in.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            K(r, c) = stiffness_(static_cast<Eigen::Index>(in[static_cast<std::size_t>(r)]),
                                 static_cast<Eigen::Index>(in[static_cast<std::size_t>(c)]));
        }
    }
    return K;
}

double AssembledForms::mass_form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(mass_.cwiseProduct(v));
}

double AssembledForms::stiffness_form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(stiffness_ * v);
}

AssembledForms assemble(const SpectralMesh& mesh) { return AssembledForms(mesh); }

Eigen::VectorXd restrict_interior(const SpectralMesh& mesh, const Eigen::VectorXd& full) {
    const auto& in = mesh.interior();
    Eigen::VectorXd r(static_cast<Eigen::Index>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) {
        r(static_cast<Eigen::Index>(k)) = full(static_cast<Eigen::Index>(in[k]));
    }
    return r;
}

Eigen::VectorXd extend_interior(const SpectralMesh& mesh, const Eigen::VectorXd& inner) {
    const auto& in = mesh.interior();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dofs()));
    for (std::size_t k = 0; k < in.size(); ++k) {
        full(static_cast<Eigen::Index>(in[k])) = inner(static_cast<Eigen::Index>(k));
    }
    return full;
}

Eigen::VectorXd h1_projection(const std::function<double(double)>& f, const SpectralMesh& mesh) {
    const double fa = f(mesh.a());
    const double fb = f(mesh.b());
    if (std::abs(fa) > 1e-12 || std::abs(fb) > 1e-12) {
        throw DomainError("h1_projection: function must vanish on the boundary");
    }
    // b_j = (f', ℓ_j') = [f ℓ_j'] over element ends - (f, ℓ_j''), so only f
    // itself is sampled.
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dofs()));
    for (std::size_t i = 0; i < mesh.elements(); ++i) {
        const std::size_t N = mesh.degree(i);
        const double h = mesh.width(i);
        const double s = 2.0 / h;
        const Eigen::MatrixXd& D = mesh.derivative(i);
        const Eigen::MatrixXd second = mesh.norm_values(i) * D * D;
        const auto& gq = mesh.norm_rule(i);
        Eigen::VectorXd fq(static_cast<Eigen::Index>(gq.nodes.size()));
        for (std::size_t q = 0; q < gq.nodes.size(); ++q) {
            fq(static_cast<Eigen::Index>(q)) =
                gq.weights[q] * f(mesh.left(i) + 0.5 * (gq.nodes[q] + 1.0) * h);
        }
        const double fl = f(mesh.left(i));
        const double fr = f(mesh.left(i) + h);
        const auto last = static_cast<Eigen::Index>(N);
        for (std::size_t j = 0; j <= N; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double boundary = s * (fr * D(last, jj) - fl * D(0, jj));
            const double interior = 0.5 * h * s * s * second.col(jj).dot(fq);
            rhs(static_cast<Eigen::Index>(mesh.global_index(i, j))) += boundary - interior;
        }
    }
    const AssembledForms forms(mesh);
    Eigen::LLT<Eigen::MatrixXd> llt(forms.interior_stiffness());
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("h1_projection: stiffness matrix is not positive definite");
    }
    return extend_interior(mesh, llt.solve(restrict_interior(mesh, rhs)));
}

// ---------------------------------------------------------------------------
// Norms

namespace {

template <typename Integrand>
double integrate_squared(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs, bool derivative,
                         Integrand reference) {
    double sum = 0.0;
    for (std::size_t i = 0; i < mesh.elements(); ++i) {
        const std::size_t N = mesh.degree(i);
        const double h = mesh.width(i);
        Eigen::VectorXd local(static_cast<Eigen::Index>(N + 1));
        for (std::size_t k = 0; k <= N; ++k) {
            local(static_cast<Eigen::Index>(k)) =
                coeffs(static_cast<Eigen::Index>(mesh.global_index(i, k)));
        }
        Eigen::VectorXd vals =
            derivative ? Eigen::VectorXd((2.0 / h) * (mesh.norm_derivatives(i) * local))
                       : Eigen::VectorXd(mesh.norm_values(i) * local);
        const auto& gq = mesh.norm_rule(i);
        for (std::size_t q = 0; q < gq.nodes.size(); ++q) {
            const double x = mesh.left(i) + 0.5 * (gq.nodes[q] + 1.0) * h;
            const double e = vals(static_cast<Eigen::Index>(q)) - reference(x);
            sum += 0.5 * h * gq.weights[q] * e * e;
        }
    }
    return std::sqrt(sum);
}

}  // namespace

double l2_norm(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs) {
    return integrate_squared(mesh, coeffs, false, [](double) { return 0.0; });
}

double l2_error(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs,
                const std::function<double(double)>& f) {
    return integrate_squared(mesh, coeffs, false, f);
}

double h1_seminorm_error(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs,
                         const std::function<double(double)>& df) {
    return integrate_squared(mesh, coeffs, true, df);
}

}  // namespace fracwsgl
