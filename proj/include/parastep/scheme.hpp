#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "parastep/geometry.hpp"
#include "parastep/nonlinearity.hpp"

namespace parastep {

/// Integer directions y (scaled by h at use) with 0 < |y| < N, one
/// representative per pair {y, -y} (first nonzero entry positive).
struct Stencil {
    std::size_t dim = 0;
    int range = 2;
    std::vector<std::vector<int>> directions;

    /// Every lattice direction with |y| < N.
    static Stencil lattice(std::size_t n, int N);
    /// The n coordinate axes only.
    static Stencil axes(std::size_t n);

    std::size_t size() const { return directions.size(); }
    double norm_squared(std::size_t k) const;
    /// Throws unless the axes are present (and, for n = 2, the diagonals when N >= 2
    /// and the stencil is a lattice stencil).
    void validate() const;
};

/// Local data the scheme reads at one node: u at the node, at the predecessor
/// (x, t - h^2), and at x +- h y for every stencil direction y.
struct StencilValues {
    double center = 0.0;
    double previous = 0.0;
    std::vector<double> plus;
    std::vector<double> minus;
};

/// F_h(r) = min over groups a of max over forms b of sum_y gamma^{ab}_y r_y.
class SchemeDescriptor {
public:
    using Forms = std::vector<std::vector<std::vector<double>>>;

    /// Raw construction from coefficient tables. Slope bounds default to the
    /// smallest and largest coefficient. No (S1) validation happens here;
    /// check_monotonicity is the referee.
    SchemeDescriptor(Stencil stencil, const Forms& groups, NonlinearityDescriptor source,
                     std::optional<EllipticityConstants> slope_bounds = std::nullopt);

    const Stencil& stencil() const { return stencil_; }
    const NonlinearityDescriptor& source() const { return source_; }
    double lambda0() const { return lambda0_; }
    double Lambda0() const { return Lambda0_; }
    std::size_t group_count() const { return group_begin_.size() - 1; }
    std::size_t form_count() const { return group_begin_.back(); }
    std::size_t group_begin(std::size_t a) const { return group_begin_[a]; }
    std::size_t group_end(std::size_t a) const { return group_begin_[a + 1]; }
    std::span<const double> form(std::size_t f) const;

    double F_h(std::span<const double> r) const;
    /// Index of the form realizing F_h(r) (outer argmin of inner argmax, first wins).
    std::size_t active_form(std::span<const double> r) const;

    /// Second differences r_y = delta^2_y u at one node.
    void second_differences(const StencilValues& v, double h, std::span<double> r) const;
    /// S_h = delta_tau^- u - F_h(delta^2 u).
    double residual(const StencilValues& v, double h) const;

    nlohmann::json coefficient_table() const;

private:
    Stencil stencil_;
    NonlinearityDescriptor source_;
    std::vector<double> coeffs_;
    std::vector<std::size_t> group_begin_;
    double lambda0_ = 0.0;
    double Lambda0_ = 0.0;
};

/// Build an implicit monotone scheme for F on the stencil.
///
/// Directions are grouped by unit vector; parallel members share their
/// direction's coefficient equally. Orthonormal frames are found among the
/// direction classes. A frame form puts a_d on each frame direction and a
/// small weight on every other class so that all coefficients are positive;
/// the lattice stencil is symmetric under permutations and reflections, so the
/// off-frame weights add up to eps * tr(X) on quadratics and the effective
/// frame coefficients are a_d + eps.
///   pucci_plus:   max over frames and a in {l - eps, L - eps}^n (one group)
///   pucci_minus:  min over the same forms (one group per form)
///   linear A:     a frame diagonalizing A, a_d = d.A.d - eps
///   bellman:      each member as in the linear case, min-max layout kept
/// Throws "stencil cannot represent F; enlarge N or supply bellman_isaacs form"
/// when no frame works (custom F after its ellipticity check, or a linear A
/// not diagonal in any frame of the stencil).
SchemeDescriptor build_monotone_scheme(const NonlinearityDescriptor& F, const Stencil& stencil);

/// (u(x,t) - u(x,t-h^2)) / h^2. Throws "needs boundary band" on the first level.
double delta_tau_minus(const MeshFunction& u, std::size_t node);
/// (u(x+hy) + u(x-hy) - 2u(x)) / |hy|^2 at the node's time. Throws off the grid.
double delta2_y(const MeshFunction& u, std::size_t node, std::span<const int> y);

/// Gather the stencil values of u at a node (neighbors must exist).
StencilValues gather(const SchemeDescriptor& S, const MeshFunction& u, std::size_t node);

/// S_h[u] at an interior node. Throws if the node is not interior.
double apply_scheme(const SchemeDescriptor& S, const MeshFunction& u, std::size_t node);

struct MonotonicityReport {
    int trials = 0;
    double min_slope = 0.0;
    double max_slope = 0.0;
    int slope_violations = 0;
    int pair_violations = 0;
    bool positive_bounds = false;
    bool pass = false;
};

/// Central-difference slopes of F_h at random r (step 1e-6 max(1, |r_i|)) must
/// lie in [lambda0 - tol, Lambda0 + tol] with lambda0 > 0; random ordered local
/// pairs u <= v touching at the center must satisfy S_h[u] >= S_h[v].
MonotonicityReport check_monotonicity(const SchemeDescriptor& S, int trials, std::uint64_t seed = 7,
                                      double tolerance = 1e-6);

/// Smooth test function with the derivative data the consistency fit needs.
struct SmoothTestFunction {
    std::function<double(const ParabolicPoint&)> value;
    std::function<double(const ParabolicPoint&)> time_derivative;
    std::function<Matrix(const ParabolicPoint&)> hessian;
    double d3_bound = 0.0;  ///< sup |D^3_x phi|
    double d4_bound = 0.0;  ///< sup |D^4_x phi|
    double tt_bound = 0.0;  ///< sup |phi_tt|
};

struct ConsistencyReport {
    std::vector<double> h;
    std::vector<double> sup_error;
    /// Smallest K with err <= K (h + h |D^3 phi| + h^2 |phi_tt|) at every level.
    double K_first_order = 0.0;
    /// Smallest K with err <= K h^2 (1 + |D^4 phi| + |phi_tt|) at every level.
    double K_second_order = 0.0;
    bool decreasing = true;
};

/// sup over interior nodes of |phi_t - F(D^2 phi) - S_h[phi]| on `spec` and on
/// `levels - 1` dyadic refinements of it.
ConsistencyReport consistency_error(const SchemeDescriptor& S, const SmoothTestFunction& phi,
                                    const MeshSpec& spec, int levels = 1);

}  // namespace parastep
