#pragma once

#include <span>
#include <string>
#include <vector>

#include "parastep/geometry.hpp"

namespace parastep {

enum class ConvolutionMode { inf, sup };
enum class ConvolutionVariables { space_time, space_only };

struct ConvolutionParams {
    double theta = 1.0;
    ConvolutionMode mode = ConvolutionMode::inf;
    ConvolutionVariables variables = ConvolutionVariables::space_time;
};

/// Lower envelope of the parabolas f_k + (q - y_k)^2 / (2 theta) for strictly
/// increasing y_k; evaluation at any real q in O(log m).
class ParabolaEnvelope {
public:
    ParabolaEnvelope(std::span<const double> positions, std::span<const double> values, double theta);

    struct Hit {
        double value;
        std::size_t source;
    };
    Hit evaluate(double q) const;

private:
    std::vector<double> y_, f_;
    std::vector<std::size_t> hull_;
    std::vector<double> breaks_;
    double theta_;
};

struct ConvolutionValue {
    double value = 0.0;
    std::size_t extremizer = 0;  ///< linear node index where the extremum is attained
};

/// v^-(x,t) = min over nodes (y,s) of v(y,s) + |x-y|^2/(2 theta) + |t-s|^2/(2 theta)
/// and the mirrored sup. Per-node time envelopes are built once; each query
/// then reduces the spatial axes one at a time.
class MeshConvolution {
public:
    MeshConvolution(const MeshFunction& v, double theta, ConvolutionMode mode);

    ConvolutionValue operator()(const ParabolicPoint& q) const;
    double theta() const { return theta_; }
    ConvolutionMode mode() const { return mode_; }

private:
    const MeshSpec spec_;
    double theta_;
    ConvolutionMode mode_;
    std::vector<ParabolaEnvelope> time_envelopes_;  // one per spatial node
};

/// omega(h, theta) = n h + 2 theta^{1/2} |v|_{C^{0,eta}} (diam U)^eta and the
/// region U_theta^h = {p : d_e(p, parabolic boundary) >= omega + N h}.
struct ConvolutionReport {
    double theta = 0.0;
    double eta = 1.0;
    double holder_norm = 0.0;
    double diameter = 0.0;
    double omega = 0.0;
    double region_margin = 0.0;
    std::string region;
    std::size_t region_nodes = 0;
    /// max over queries of the Euclidean distance to the extremizer.
    double max_shift = 0.0;
};

struct ConvolutionResult {
    std::vector<double> values;
    std::vector<std::size_t> extremizers;
    ConvolutionReport report;
};

ConvolutionResult inf_convolution_mesh(const MeshFunction& v, double theta,
                                       std::span<const ParabolicPoint> queries, double eta = 1.0);
ConvolutionResult sup_convolution_mesh(const MeshFunction& v, double theta,
                                       std::span<const ParabolicPoint> queries, double eta = 1.0);

/// Every node of the mesh as a query point.
std::vector<ParabolicPoint> mesh_points(const MeshSpec& spec);

/// Euclidean distance from p to the boundary of the box times (0, T) (bottom,
/// lateral faces and top).
double distance_to_cylinder_boundary(const MeshSpec& spec, const ParabolicPoint& p);

/// Spatial-only convolutions at a time on the lattice:
///   x_sup(x,t) = max_y u(y,t) - |x-y|^2/(2 theta),  x_inf = min_y u(y,t) + |x-y|^2/(2 theta).
/// Throws if t is not a mesh time.
ConvolutionValue x_sup_convolution(const MeshFunction& u, double theta, const ParabolicPoint& q);
ConvolutionValue x_inf_convolution(const MeshFunction& u, double theta, const ParabolicPoint& q);

/// Discrete Lipschitz constant in x: max over same-time node pairs.
double x_lipschitz(const MeshFunction& u);

struct ConvolutionPropertyReport {
    ConvolutionReport report;
    // (a) ordering and the lower bound v^- >= v - |v| omega^eta inside the region
    std::size_t order_violations = 0;
    std::size_t lower_bound_violations = 0;
    /// max over nodes of d_e(p, p*) - omega; reported, not part of `pass`.
    double shift_bound_excess = 0.0;
    // (b) semiconcavity of v^- (and semiconvexity of v^+) along lattice directions |y| < N
    std::size_t semiconcavity_violations = 0;
    double max_second_difference = 0.0;  ///< max delta^2_y v^- (compare with 1/theta)
    std::size_t triples_tested = 0;
    // (c) time seminorm of v^+- against 3T/theta
    double time_seminorm = 0.0;
    double time_bound = 0.0;
    bool pass = false;
};

/// Evaluate v^- and v^+ at every node and check the properties above.
ConvolutionPropertyReport verify_convolution_properties(const MeshFunction& v, double theta, double eta);

}  // namespace parastep
