#pragma once

#include <optional>
#include <vector>

#include "parastep/geometry.hpp"

namespace parastep {

/// Gamma(u): the largest mesh function below u that is convex in x on every
/// time slice and nonincreasing in t. Computed as the running minimum in time
/// followed by the lower convex envelope of each slice (exact: monotone chain
/// in 1D, a small linear program per node for n >= 2).
MeshFunction lower_monotone_envelope(const MeshFunction& u);

/// -Gamma(-u): concave in x, nondecreasing in t, above u.
MeshFunction upper_monotone_envelope(const MeshFunction& u);

/// Lower convex envelope of one spatial slice (values in spatial order).
std::vector<double> lower_convex_envelope_slice(const MeshSpec& spec, std::span<const double> values);

struct ContactSet {
    std::vector<std::size_t> nodes;
    std::vector<char> mask;
    double tolerance = 0.0;
    /// node count times h^{n+2}
    double measure = 0.0;
};

/// Nodes with |u - gamma| <= tol; tol < 0 selects 1e-9 (1 + sup |u|).
ContactSet contact_set(const MeshFunction& u, const MeshFunction& gamma, double tol = -1.0);

struct AbpDiagnostic {
    double rho = 0.0;
    double K = 0.0;
    double lhs = 0.0;  ///< sup u^-
    double contact_measure = 0.0;
    std::size_t contact_nodes = 0;
    double rhs_core = 0.0;  ///< rho^{n/(n+1)} |contact|^{1/(n+1)} K
    double ratio = 0.0;     ///< lhs / rhs_core (0 when lhs = 0)
};

/// The mesh of `u` is read as the cube Q_rho: spatial box of half-width rho
/// (rho = half the smallest side) over its time range. -u^- is extended by 0
/// to the spatially doubled box, Gamma is taken there, and the contact set is
/// {u = Gamma} on the nodes of the original cube.
/// K defaults to estimate_regularity_constant(u). Throws if u < 0 somewhere
/// on the parabolic boundary (lateral faces and the first time level).
AbpDiagnostic abp_diagnostic(const MeshFunction& u, std::optional<double> K = std::nullopt);

/// max(discrete time-Lipschitz constant, largest positive axis second difference).
double estimate_regularity_constant(const MeshFunction& u);

}  // namespace parastep
