#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parastep/geometry.hpp"
#include "parastep/nonlinearity.hpp"

namespace parastep {

/// P(x,t) = c + l.x + m t + (a.x) t + x.Q x, so D^2 P = 2Q and P_t = m + a.x.
struct Paraboloid {
    double c = 0.0;
    Vector l;
    double m = 0.0;
    Vector a;
    Matrix Q;

    static Paraboloid zero(std::size_t n);
    /// The paraboloid whose expansion about `origin` is
    ///   c0 + l.z + m s' + (a.z) s' + z.Q z,  z = x - origin.x, s' = t - origin.t.
    static Paraboloid about(const ParabolicPoint& origin, double c0, const Vector& l, double m,
                            const Vector& a, const Matrix& Q);

    std::size_t dim() const { return static_cast<std::size_t>(l.size()); }
    double operator()(const ParabolicPoint& p) const;
    double time_derivative(std::span<const double> x) const;
    Matrix hessian() const { return 2.0 * Q; }

    bool in_P_infinity() const { return a.cwiseAbs().maxCoeff() == 0.0; }
    /// Q = (M/2) I and |m| <= M (and no mixed term).
    bool in_P_M_plus(double M, double tol = 1e-12) const;
    bool in_P_M_minus(double M, double tol = 1e-12) const;
};

double evaluate_paraboloid(const Paraboloid& P, const ParabolicPoint& p);
/// (P_t at p, D^2 P).
std::pair<double, Matrix> paraboloid_derivatives(const Paraboloid& P, const ParabolicPoint& p);

// --- delta-viscosity falsifier ---------------------------------------------------

enum class Side { super, sub };
const char* to_string(Side s);

struct FalsifierConfig {
    double delta = 0.0;
    Side side = Side::super;
    int samples_per_node = 200;
    std::uint64_t seed = 1;
    /// < 0 selects 1e-10 (1 + sup |v|).
    double touch_tolerance = -1.0;
    double violation_tolerance = 1e-6;
};

/// A paraboloid in P_infinity touching v at `node` from below (super) or above
/// (sub) on the backward cylinder of radius delta, with P_t - F(D^2 P) of the
/// wrong sign.
struct Certificate {
    std::size_t node = 0;
    ParabolicPoint point;
    Paraboloid P;
    Side side = Side::super;
    double margin = 0.0;  ///< P_t - F(D^2 P)
};

struct FalsifierReport {
    Side side = Side::super;
    double delta = 0.0;
    double touch_tolerance = 0.0;
    double violation_tolerance = 0.0;
    std::size_t nodes_tested = 0;
    std::size_t candidates = 0;
    std::size_t touching = 0;
    /// Smallest margin seen for super (largest for sub) among touching candidates.
    double extreme_margin = 0.0;
    std::vector<Certificate> violations;  ///< at most one per node, the worst
};

/// Sound violation finder for the delta-viscosity definition.
///
/// For every node whose backward cylinder of radius delta lies in the domain,
/// paraboloids centered at the node are sampled (l, Q) and the time slope m
/// is chosen optimally: on the super side the smallest m with P <= v on the
/// cylinder's earlier nodes, on the sub side the largest m with P >= v.
/// Same-time nodes must respect the ordering up to the touch tolerance.
/// Finding nothing does not prove that v is a delta-solution.
FalsifierReport delta_falsifier(const MeshFunction& v, const NonlinearityDescriptor& F,
                                const FalsifierConfig& cfg);

struct ReplayResult {
    bool touches = false;
    bool violates = false;
    double max_excess = 0.0;  ///< max of P - v (super) or v - P (sub) over the cylinder
    double center_gap = 0.0;
    double margin = 0.0;
};

/// Re-evaluate a certificate against v from scratch.
ReplayResult replay_certificate(const MeshFunction& v, const NonlinearityDescriptor& F, const Certificate& c,
                                double delta, double touch_tolerance, double violation_tolerance);

// --- second order expansions -------------------------------------------------------

struct PsiMembership {
    bool member = false;
    /// Fitted expansion in class P, in absolute coordinates, with P(x,t) = 0.
    Paraboloid P;
    /// max over region points of |u(y,s) - u(x,t) - P(y,s)| / w(y,s),
    /// w = |x-y|^3 + |x-y|^2 |t-s| + |t-s|^2.
    double worst_ratio = 0.0;
    /// max over region points of |u - u(x,t) - P| - n M w.
    double worst_excess = 0.0;
    std::size_t points = 0;
};

/// Best class-P expansion at `node` over the grid points of `region` with
/// s <= t, fitted by minimizing the worst weighted ratio (a small LP). The
/// node is a member iff that ratio is at most n M. Throws if the node is
/// outside the region or there are fewer points than parameters.
PsiMembership psi_M_membership(const MeshFunction& u, std::size_t node, double M, const Cylinder& region);

struct GMembership {
    bool upper = false;      ///< some P in P_M^+ touches u from above on region and s <= t
    bool lower = false;      ///< the same for -u
    bool member = false;     ///< upper and lower
    bool expansion = false;  ///< a single p with |u - u(x,t) - p.(y-x)| <= M|x-y|^2/2 + M|t-s|
    Vector p;
    double expansion_margin = 0.0;  ///< min over points of budget - |error| at p
};

GMembership g_M_membership(const MeshFunction& u, std::size_t node, double M, const Cylinder& region);

struct GoodSetReport {
    std::vector<double> M;
    std::vector<double> bad_fraction;
    std::vector<double> bad_measure;  ///< bad node count times h^{n+2}
    std::size_t box_nodes = 0;
    std::vector<double> node_ratios;  ///< worst ratio per box node
    bool fitted = false;
    double slope = 0.0;  ///< least squares slope of log bad_measure against log M
    double slope_stderr = 0.0;
    double slope_ci_low = 0.0;
    double slope_ci_high = 0.0;
};

/// Bad-set measure |K \ Psi_M| for each M, with expansions fitted on `region`.
/// The slope is fitted over the M with nonzero measure (needs at least two);
/// the interval is slope +- 2 standard errors.
GoodSetReport good_set_measure(const MeshFunction& u, std::span<const double> Ms, const KBox& box,
                               const Cylinder& region);

}  // namespace parastep
