#include "parastep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parastep/error.hpp"

namespace parastep {

namespace {

void require_same_dim(const ParabolicPoint& p, const ParabolicPoint& q) {
    if (p.dim() != q.dim()) {
        throw Error("dimension mismatch: " + std::to_string(p.dim()) + " vs " +
                    std::to_string(q.dim()));
    }
}

double squared_space_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace

double parabolic_distance(const ParabolicPoint& p, const ParabolicPoint& q) {
    require_same_dim(p, q);
    return std::sqrt(squared_space_distance(p.x, q.x) + std::abs(p.t - q.t));
}

double euclidean_distance(const ParabolicPoint& p, const ParabolicPoint& q) {
    require_same_dim(p, q);
    const double dt = p.t - q.t;
    return std::sqrt(squared_space_distance(p.x, q.x) + dt * dt);
}

bool Cylinder::contains(const ParabolicPoint& p) const {
    require_same_dim(center, p);
    if (squared_space_distance(p.x, center.x) >= radius * radius) return false;
    const double r2 = radius * radius;
    if (orientation == Orientation::backward) return p.t > center.t - r2 && p.t <= center.t;
    return p.t > center.t && p.t <= center.t + r2;
}

bool ParabolicCube::contains(const ParabolicPoint& p) const {
    require_same_dim(center, p);
    for (std::size_t k = 0; k < p.dim(); ++k) {
        if (std::abs(p.x[k] - center.x[k]) > radius) return false;
    }
    return p.t > center.t - radius * radius && p.t <= center.t;
}

double KBox::half_width() const {
    return r / (9.0 * std::sqrt(static_cast<double>(center.dim())));
}

double KBox::duration() const {
    return r * r / (81.0 * static_cast<double>(center.dim()));
}

bool KBox::contains(const ParabolicPoint& p) const {
    require_same_dim(center, p);
    const double w = half_width();
    for (std::size_t k = 0; k < p.dim(); ++k) {
        if (std::abs(p.x[k] - center.x[k]) > w) return false;
    }
    return p.t > center.t && p.t <= center.t + duration();
}

double Box::min_side() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dim(); ++k) m = std::min(m, side(k));
    return m;
}

double Box::diameter() const {
    double s = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) s += side(k) * side(k);
    return std::sqrt(s);
}

double Box::distance_to_boundary(std::span<const double> x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dim(); ++k) {
        d = std::min({d, x[k] - lower[k], upper[k] - x[k]});
    }
    return std::max(d, 0.0);
}

MeshSpec::MeshSpec(double h, Box domain, double horizon, int stencil_range)
    : h_(h),
      domain_(std::move(domain)),
      requested_horizon_(horizon),
      horizon_(0.0),
      stencil_range_(stencil_range),
      levels_(0),
      spatial_count_(1) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error("mesh step h must be positive and finite");
    if (domain_.dim() == 0 || domain_.lower.size() != domain_.upper.size()) {
        throw Error("domain bounds must be non-empty and of equal dimension");
    }
    if (stencil_range_ < 2) throw Error("stencil range N must be an integer > 1");
    for (std::size_t k = 0; k < domain_.dim(); ++k) {
        if (!(domain_.upper[k] > domain_.lower[k])) throw Error("domain side must be positive");
        const double ratio = domain_.side(k) / h;
        const double cells = std::round(ratio);
        if (std::abs(ratio - cells) > 1e-9 * std::max(1.0, ratio)) {
            throw Error("h does not divide domain side " + std::to_string(k));
        }
        cells_.push_back(static_cast<int>(cells));
    }
    if (stencil_range_ * h >= domain_.min_side()) {
        throw Error("stencil exceeds domain: N h must be smaller than every side");
    }
    if (!(horizon > 0.0)) throw Error("horizon T must be positive");
    levels_ = static_cast<int>(std::floor(horizon / tau() + 1e-9));
    if (levels_ < 1) throw Error("horizon shorter than one time step h^2");
    horizon_ = levels_ * tau();

    strides_.assign(domain_.dim(), 1);
    for (std::size_t k = domain_.dim(); k-- > 0;) {
        strides_[k] = static_cast<std::ptrdiff_t>(spatial_count_);
        spatial_count_ *= static_cast<std::size_t>(cells_[k] + 1);
    }
}

std::size_t MeshSpec::spatial_index(std::span<const int> i) const {
    std::size_t s = 0;
    for (std::size_t k = 0; k < dim(); ++k) s += static_cast<std::size_t>(i[k]) * strides_[k];
    return s;
}

std::vector<int> MeshSpec::spatial_multi_index(std::size_t s) const {
    std::vector<int> i(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
        i[k] = static_cast<int>(s / strides_[k]);
        s %= strides_[k];
    }
    return i;
}

std::size_t MeshSpec::linear_index(const NodeIndex& n) const {
    return linear_index(spatial_index(n.i), n.j);
}

std::size_t MeshSpec::linear_index(std::size_t spatial, int level) const {
    return static_cast<std::size_t>(level - 1) * spatial_count_ + spatial;
}

NodeIndex MeshSpec::node(std::size_t linear) const {
    return NodeIndex{spatial_multi_index(spatial_of(linear)), level_of(linear)};
}

std::vector<double> MeshSpec::spatial_point(std::size_t spatial) const {
    const auto i = spatial_multi_index(spatial);
    std::vector<double> x(dim());
    for (std::size_t k = 0; k < dim(); ++k) x[k] = coordinate(k, i[k]);
    return x;
}

ParabolicPoint MeshSpec::point(std::size_t linear) const {
    return ParabolicPoint{spatial_point(spatial_of(linear)), time(level_of(linear))};
}

ParabolicPoint MeshSpec::point(const NodeIndex& n) const {
    ParabolicPoint p{std::vector<double>(dim()), time(n.j)};
    for (std::size_t k = 0; k < dim(); ++k) p.x[k] = coordinate(k, n.i[k]);
    return p;
}

bool MeshSpec::contains(const NodeIndex& n) const {
    if (n.i.size() != dim() || n.j < 1 || n.j > levels_) return false;
    for (std::size_t k = 0; k < dim(); ++k) {
        if (n.i[k] < 0 || n.i[k] > cells_[k]) return false;
    }
    return true;
}

std::optional<std::size_t> MeshSpec::locate(const ParabolicPoint& p) const {
    if (p.dim() != dim()) return std::nullopt;
    NodeIndex n{std::vector<int>(dim()), 0};
    for (std::size_t k = 0; k < dim(); ++k) {
        const double r = (p.x[k] - domain_.lower[k]) / h_;
        const double ri = std::round(r);
        if (std::abs(r - ri) > 1e-9) return std::nullopt;
        n.i[k] = static_cast<int>(ri);
    }
    const double rt = p.t / tau();
    const double rj = std::round(rt);
    if (std::abs(rt - rj) > 1e-9) return std::nullopt;
    n.j = static_cast<int>(rj);
    if (!contains(n)) return std::nullopt;
    return linear_index(n);
}

bool MeshSpec::is_interior(std::size_t linear) const {
    const int N = stencil_range_;
    if (level_of(linear) < N * N) return false;
    std::size_t s = spatial_of(linear);
    for (std::size_t k = 0; k < dim(); ++k) {
        const int i = static_cast<int>(s / strides_[k]);
        s %= strides_[k];
        if (i < N || cells_[k] - i < N) return false;
    }
    return true;
}

bool MeshSpec::operator==(const MeshSpec& o) const {
    return h_ == o.h_ && domain_.lower == o.domain_.lower && domain_.upper == o.domain_.upper &&
           levels_ == o.levels_ && stencil_range_ == o.stencil_range_;
}

MeshPartition classify_mesh_points(const MeshSpec& spec) {
    if (spec.stencil_range() * spec.h() > 0.5 * spec.domain().min_side()) {
        throw Error("stencil exceeds domain: N h is larger than the domain half-width");
    }
    MeshPartition part;
    part.interior_mask.assign(spec.node_count(), 0);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (spec.is_interior(k)) {
            part.interior.push_back(k);
            part.interior_mask[k] = 1;
        } else {
            part.boundary.push_back(k);
        }
    }
    return part;
}

MeshFunction::MeshFunction(MeshSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_.node_count()) {
        throw Error("mesh function has " + std::to_string(values_.size()) + " values, mesh has " +
                    std::to_string(spec_.node_count()) + " nodes");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error("mesh function values must be finite");
    }
}

double MeshFunction::sup_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

HolderNorm discrete_holder_norm(const MeshFunction& u, double eta,
                                std::span<const std::size_t> subset) {
    if (!(eta > 0.0 && eta <= 1.0)) throw Error("Hoelder exponent must lie in (0, 1]");
    const MeshSpec& spec = u.spec();
    std::vector<std::size_t> nodes;
    if (subset.empty()) {
        nodes.resize(spec.node_count());
        for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = k;
    } else {
        nodes.assign(subset.begin(), subset.end());
    }
    std::vector<ParabolicPoint> pts;
    pts.reserve(nodes.size());
    for (std::size_t k : nodes) pts.push_back(spec.point(k));

    HolderNorm out;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        const double ua = u[nodes[a]];
        out.sup = std::max(out.sup, std::abs(ua));
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const double num = std::abs(ua - u[nodes[b]]);
            if (num == 0.0) continue;
            const double d = parabolic_distance(pts[a], pts[b]);
            const double q = eta == 1.0 ? num / d : num / std::pow(d, eta);
            out.seminorm = std::max(out.seminorm, q);
        }
    }
    out.norm = out.sup + out.seminorm;
    return out;
}

double time_holder_seminorm(const MeshFunction& u, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw Error("Hoelder exponent must lie in (0, 1]");
    const MeshSpec& spec = u.spec();
    double best = 0.0;
    for (std::size_t s = 0; s < spec.spatial_count(); ++s) {
        for (int a = 1; a <= spec.time_levels(); ++a) {
            const double ua = u[spec.linear_index(s, a)];
            for (int b = a + 1; b <= spec.time_levels(); ++b) {
                const double dt = (b - a) * spec.tau();
                const double num = std::abs(ua - u[spec.linear_index(s, b)]);
                best = std::max(best, num / std::pow(dt, eta));
            }
        }
    }
    return best;
}

std::vector<std::size_t> cylinder_nodes(const Cylinder& c, const MeshSpec& spec) {
    if (c.center.dim() != spec.dim()) throw Error("cylinder dimension does not match mesh");
    if (!(c.radius > 0.0)) throw Error("cylinder radius must be positive");
    const double r2 = c.radius * c.radius;
    const double t_lo = c.orientation == Orientation::backward ? c.center.t - r2 : c.center.t;
    const double t_hi = c.orientation == Orientation::backward ? c.center.t : c.center.t + r2;

    // Candidate index ranges, widened by one to stay clear of rounding at the edges.
    const int j_lo = std::max(1, static_cast<int>(std::floor(t_lo / spec.tau())) - 1);
    const int j_hi = std::min(spec.time_levels(), static_cast<int>(std::ceil(t_hi / spec.tau())) + 1);
    std::vector<int> lo(spec.dim()), hi(spec.dim());
    for (std::size_t k = 0; k < spec.dim(); ++k) {
        const double a = (c.center.x[k] - c.radius - spec.domain().lower[k]) / spec.h();
        const double b = (c.center.x[k] + c.radius - spec.domain().lower[k]) / spec.h();
        lo[k] = std::max(0, static_cast<int>(std::floor(a)) - 1);
        hi[k] = std::min(spec.cells(k), static_cast<int>(std::ceil(b)) + 1);
        if (lo[k] > hi[k]) return {};
    }

    std::vector<std::size_t> out;
    if (j_lo > j_hi) return out;
    std::vector<int> idx(lo);
    for (int j = j_lo; j <= j_hi; ++j) {
        idx = lo;
        while (true) {
            NodeIndex n{idx, j};
            if (c.contains(spec.point(n))) out.push_back(spec.linear_index(n));
            std::size_t k = spec.dim();
            while (k-- > 0) {
                if (++idx[k] <= hi[k]) break;
                idx[k] = lo[k];
            }
            if (k == static_cast<std::size_t>(-1)) break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace parastep
