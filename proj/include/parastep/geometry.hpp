#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace parastep {

/// A point (x, t) of space-time.
struct ParabolicPoint {
    std::vector<double> x;
    double t = 0.0;

    std::size_t dim() const { return x.size(); }
};

/// (|x - y|^2 + |s - t|)^{1/2}. Throws on dimension mismatch.
double parabolic_distance(const ParabolicPoint& p, const ParabolicPoint& q);

/// Ordinary Euclidean distance in R^{n+1}.
double euclidean_distance(const ParabolicPoint& p, const ParabolicPoint& q);

enum class Orientation { forward, backward };

/// Ball-times-interval cylinder.
///   backward: B_r(x) x (t - r^2, t]
///   forward:  B_r(x) x (t, t + r^2]
/// The ball is open, the time interval half-open.
struct Cylinder {
    ParabolicPoint center;
    double radius = 0.0;
    Orientation orientation = Orientation::backward;

    bool contains(const ParabolicPoint& p) const;
};

/// Parabolic cube [x - r, x + r]^n x (t - r^2, t].
struct ParabolicCube {
    ParabolicPoint center;
    double radius = 0.0;

    bool contains(const ParabolicPoint& p) const;
};

/// The box K_r(x, t) = [x +- r/(9 sqrt n)]^n x (t, t + r^2/(81 n)].
struct KBox {
    ParabolicPoint center;
    double r = 0.0;

    double half_width() const;
    double duration() const;
    bool contains(const ParabolicPoint& p) const;
};

/// Closed axis-aligned box in R^n.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }
    double side(std::size_t axis) const { return upper[axis] - lower[axis]; }
    double min_side() const;
    double diameter() const;
    /// Distance from x to the complement of the open box (0 on or outside the boundary).
    double distance_to_boundary(std::span<const double> x) const;
};

/// Node of the mesh: spatial multi-index and time level j >= 1 (t = j h^2).
struct NodeIndex {
    std::vector<int> i;
    int j = 0;

    bool operator==(const NodeIndex&) const = default;
};

/// The space-time mesh h Z^n x h^2 Z restricted to a box domain times (0, T].
///
/// Spatial nodes include the faces of the box. The time step is h^2 and the
/// requested horizon is rounded down to a whole number of steps. Linear node
/// order is time-level major, then spatial row-major (axis 0 slowest).
class MeshSpec {
public:
    MeshSpec(double h, Box domain, double horizon, int stencil_range);

    double h() const { return h_; }
    double tau() const { return h_ * h_; }
    std::size_t dim() const { return domain_.dim(); }
    const Box& domain() const { return domain_; }
    double horizon() const { return horizon_; }
    double requested_horizon() const { return requested_horizon_; }
    int stencil_range() const { return stencil_range_; }

    int cells(std::size_t axis) const { return cells_[axis]; }
    int time_levels() const { return levels_; }
    std::size_t spatial_count() const { return spatial_count_; }
    std::size_t node_count() const { return spatial_count_ * static_cast<std::size_t>(levels_); }
    std::ptrdiff_t stride(std::size_t axis) const { return strides_[axis]; }

    std::size_t spatial_index(std::span<const int> i) const;
    std::vector<int> spatial_multi_index(std::size_t s) const;
    std::size_t linear_index(const NodeIndex& node) const;
    std::size_t linear_index(std::size_t spatial, int level) const;
    NodeIndex node(std::size_t linear) const;
    std::size_t spatial_of(std::size_t linear) const { return linear % spatial_count_; }
    int level_of(std::size_t linear) const { return static_cast<int>(linear / spatial_count_) + 1; }

    double coordinate(std::size_t axis, int i) const { return domain_.lower[axis] + i * h_; }
    double time(int level) const { return level * tau(); }
    std::vector<double> spatial_point(std::size_t spatial) const;
    ParabolicPoint point(std::size_t linear) const;
    ParabolicPoint point(const NodeIndex& node) const;

    bool contains(const NodeIndex& node) const;
    /// Index of the node exactly at p (within 1e-9 h), if any.
    std::optional<std::size_t> locate(const ParabolicPoint& p) const;

    /// Interior test d(p, parabolic boundary) >= N h, evaluated in exact
    /// integer arithmetic: every spatial index at least N from a face and
    /// time level at least N^2.
    bool is_interior(std::size_t linear) const;

    bool operator==(const MeshSpec& other) const;

private:
    double h_;
    Box domain_;
    double requested_horizon_;
    double horizon_;
    int stencil_range_;
    std::vector<int> cells_;
    std::vector<std::ptrdiff_t> strides_;
    int levels_;
    std::size_t spatial_count_;
};

struct MeshPartition {
    std::vector<std::size_t> interior;
    std::vector<std::size_t> boundary;
    std::vector<char> interior_mask;
};

/// Split U_h into interior and boundary nodes relative to the stencil range N.
/// Throws "stencil exceeds domain" when N h exceeds half the smallest side.
MeshPartition classify_mesh_points(const MeshSpec& spec);

/// Real values on every node of U_h. Immutable after construction.
class MeshFunction {
public:
    MeshFunction(MeshSpec spec, std::vector<double> values);

    template <class F>
    static MeshFunction sample(const MeshSpec& spec, F&& f) {
        std::vector<double> v(spec.node_count());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(spec.point(k));
        return MeshFunction(spec, std::move(v));
    }

    const MeshSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t linear) const { return values_[linear]; }
    double at(const NodeIndex& node) const { return values_[spec_.linear_index(node)]; }
    double sup_abs() const;

private:
    MeshSpec spec_;
    std::vector<double> values_;
};

struct HolderNorm {
    double seminorm = 0.0;
    double sup = 0.0;
    double norm = 0.0;
};

/// Discrete C^{0,eta} seminorm/norm over all node pairs (O(#nodes^2)).
/// If `subset` is non-empty only those nodes take part.
HolderNorm discrete_holder_norm(const MeshFunction& u, double eta,
                                std::span<const std::size_t> subset = {});

/// sup over x and s != t of |u(x,t) - u(x,s)| / |t - s|^eta.
double time_holder_seminorm(const MeshFunction& u, double eta);

/// Nodes inside the cylinder (same membership rule as Cylinder::contains).
std::vector<std::size_t> cylinder_nodes(const Cylinder& c, const MeshSpec& spec);

}  // namespace parastep
