#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace fracwsgl {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Legendre polynomial P_N(x) and its derivative.
struct LegendreValue {
    double p;
    double dp;
};
LegendreValue legendre(std::size_t N, double x);

/// N+1 Legendre-Gauss-Lobatto points on [-1, 1] in increasing order.
/// Throws InvalidParameter for N = 0.
QuadratureRule lgl_nodes(std::size_t N);

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// Barycentric weights of the given interpolation nodes.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

/// D(i, j) = ℓ_j'(x_i) for the Lagrange basis on `nodes`.
Eigen::MatrixXd differentiation_matrix(const std::vector<double>& nodes);

/// E(q, j) = ℓ_j(points[q]).
Eigen::MatrixXd interpolation_matrix(const std::vector<double>& nodes,
                                     const std::vector<double>& points);

/// Number of Gauss points per element used by the norms is degree + extra.
inline constexpr std::size_t kNormQuadratureExtra = 16;

/// Partition a = x_0 < ... < x_M = b with degree N_i on element i and
/// globally numbered LGL nodes; interface nodes are shared.
class SpectralMesh {
public:
    SpectralMesh(std::vector<double> breakpoints, std::vector<std::size_t> degrees);

    /// M equal elements of degree N on (a, b).
    static SpectralMesh uniform(double a, double b, std::size_t M, std::size_t N);

    std::size_t elements() const { return degrees_.size(); }
    double a() const { return breakpoints_.front(); }
    double b() const { return breakpoints_.back(); }
    double left(std::size_t i) const { return breakpoints_[i]; }
    double width(std::size_t i) const { return breakpoints_[i + 1] - breakpoints_[i]; }
    std::size_t degree(std::size_t i) const { return degrees_[i]; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<std::size_t>& degrees() const { return degrees_; }

    std::size_t dofs() const { return coords_.size(); }
    std::size_t global_index(std::size_t element, std::size_t local) const {
        return offsets_[element] + local;
    }
    /// Physical coordinate of every global node.
    const std::vector<double>& coordinates() const { return coords_; }
    bool is_boundary(std::size_t g) const { return g == 0 || g + 1 == dofs(); }
    /// Global indices of the non-boundary nodes.
    const std::vector<std::size_t>& interior() const { return interior_; }

    /// Reference LGL rule of element i.
    const QuadratureRule& rule(std::size_t i) const { return rules_[rule_of_[i]]; }
    /// Reference differentiation matrix of element i.
    const Eigen::MatrixXd& derivative(std::size_t i) const { return diffs_[rule_of_[i]]; }
    const std::vector<double>& bary(std::size_t i) const { return barys_[rule_of_[i]]; }

    /// Gauss rule with degree + kNormQuadratureExtra points for element i, and
    /// the matrices mapping nodal values to values and ξ-derivatives there.
    const QuadratureRule& norm_rule(std::size_t i) const { return norm_rules_[rule_of_[i]]; }
    const Eigen::MatrixXd& norm_values(std::size_t i) const { return norm_values_[rule_of_[i]]; }
    const Eigen::MatrixXd& norm_derivatives(std::size_t i) const {
        return norm_derivs_[rule_of_[i]];
    }

    /// Element containing x (the left one at interfaces).
    std::size_t locate(double x) const;

    /// Value of the piecewise polynomial with nodal values `coeffs` at x.
    double evaluate(const Eigen::VectorXd& coeffs, double x) const;

private:
    std::vector<double> breakpoints_;
    std::vector<std::size_t> degrees_;
    std::vector<std::size_t> offsets_;
    std::vector<double> coords_;
    std::vector<std::size_t> interior_;
    // One reference rule per distinct degree.
    std::vector<QuadratureRule> rules_;
    std::vector<Eigen::MatrixXd> diffs_;
    std::vector<std::vector<double>> barys_;
    std::vector<QuadratureRule> norm_rules_;
    std::vector<Eigen::MatrixXd> norm_values_;
    std::vector<Eigen::MatrixXd> norm_derivs_;
    std::vector<std::size_t> rule_of_;
};

/// Nodal interpolant I_N f.
Eigen::VectorXd interpolate(const std::function<double(double)>& f, const SpectralMesh& mesh);

/// Mass (LGL quadrature at element degree, hence diagonal) and exact
/// stiffness on V_N. The restriction to V_N^0 keeps the interior rows and
/// columns only.
class AssembledForms {
public:
    explicit AssembledForms(const SpectralMesh& mesh);

    const SpectralMesh& mesh() const { return mesh_; }
    const Eigen::VectorXd& mass_diagonal() const { return mass_; }
    const Eigen::MatrixXd& stiffness() const { return stiffness_; }

    /// Interior blocks, indexed in mesh().interior() order.
    Eigen::VectorXd interior_mass() const;
    Eigen::MatrixXd interior_stiffness() const;

    double mass_form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double stiffness_form(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

private:
    SpectralMesh mesh_;
    Eigen::VectorXd mass_;
    Eigen::MatrixXd stiffness_;
};

AssembledForms assemble(const SpectralMesh& mesh);

/// Coefficients of v restricted to interior nodes, and back (boundary zero).
Eigen::VectorXd restrict_interior(const SpectralMesh& mesh, const Eigen::VectorXd& full);
Eigen::VectorXd extend_interior(const SpectralMesh& mesh, const Eigen::VectorXd& inner);

/// P_N^{1,0} f: the w in V_N^0 with (∂(w - f), ∂v) = 0 for every v in V_N^0.
/// Requires f(a) = f(b) = 0 up to 1e-12.
Eigen::VectorXd h1_projection(const std::function<double(double)>& f, const SpectralMesh& mesh);

/// ‖u‖ of a piecewise polynomial by Gauss quadrature.
double l2_norm(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs);

/// ‖u - f‖ by Gauss quadrature.
double l2_error(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs,
                const std::function<double(double)>& f);

/// ‖∂_x u - df‖.
double h1_seminorm_error(const SpectralMesh& mesh, const Eigen::VectorXd& coeffs,
                         const std::function<double(double)>& df);

}  // namespace fracwsgl
