#include "parastep/convolutions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "parastep/error.hpp"
#include "parastep/scheme.hpp"

namespace parastep {

ParabolaEnvelope::ParabolaEnvelope(std::span<const double> positions, std::span<const double> values,
                                   double theta)
    : y_(positions.begin(), positions.end()), f_(values.begin(), values.end()), theta_(theta) {
    if (!(theta > 0.0)) throw Error("theta must be positive");
    if (y_.empty() || y_.size() != f_.size()) throw Error("envelope needs matching non-empty inputs");
    for (std::size_t k = 1; k < y_.size(); ++k) {
        if (!(y_[k] > y_[k - 1])) throw Error("envelope positions must be strictly increasing");
    }
    auto meet = [&](std::size_t a, std::size_t b) {
        return (2.0 * theta_ * (f_[b] - f_[a]) + y_[b] * y_[b] - y_[a] * y_[a]) / (2.0 * (y_[b] - y_[a]));
    };
    hull_.push_back(0);
    breaks_.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t q = 1; q < y_.size(); ++q) {
        double s = meet(hull_.back(), q);
        while (s <= breaks_.back()) {
            hull_.pop_back();
            breaks_.pop_back();
            if (hull_.empty()) break;
            s = meet(hull_.back(), q);
        }
        if (hull_.empty()) s = -std::numeric_limits<double>::infinity();
        hull_.push_back(q);
        breaks_.push_back(s);
    }
}

ParabolaEnvelope::Hit ParabolaEnvelope::evaluate(double q) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), q);
    const std::size_t k = hull_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    const double d = q - y_[k];
    return {f_[k] + d * d / (2.0 * theta_), k};
}

namespace {

// Reduce the spatial axes of a per-spatial-node array (row-major, axis 0
// slowest) by parabola envelopes at the query coordinates, last axis first.
ConvolutionValue reduce_space(const MeshSpec& spec, std::vector<double> g, std::vector<std::size_t> node,
                              std::span<const double> x, double theta) {
    for (std::size_t d = spec.dim(); d-- > 0;) {
        const std::size_t len = static_cast<std::size_t>(spec.cells(d)) + 1;
        std::vector<double> pos(len);
        for (std::size_t i = 0; i < len; ++i) pos[i] = spec.coordinate(d, static_cast<int>(i));
        const std::size_t lines = g.size() / len;
        std::vector<double> ng(lines);
        std::vector<std::size_t> nn(lines);
        for (std::size_t l = 0; l < lines; ++l) {
            const ParabolaEnvelope env(pos, std::span<const double>(g.data() + l * len, len), theta);
            const auto hit = env.evaluate(x[d]);
            ng[l] = hit.value;
            nn[l] = node[l * len + hit.source];
        }
        g = std::move(ng);
        node = std::move(nn);
    }
    return {g.front(), node.front()};
}

int lattice_level(const MeshSpec& spec, double t) {
    const double r = t / spec.tau();
    const double j = std::round(r);
    if (std::abs(r - j) > 1e-9 || j < 1 || j > spec.time_levels()) {
        throw Error("time is not on the mesh's time lattice");
    }
    return static_cast<int>(j);
}

void check_query(const MeshSpec& spec, const ParabolicPoint& q) {
    if (q.dim() != spec.dim()) throw Error("query dimension does not match the mesh");
}

ConvolutionResult convolve(const MeshFunction& v, double theta, std::span<const ParabolicPoint> queries,
                           double eta, ConvolutionMode mode) {
    const MeshSpec& spec = v.spec();
    const MeshConvolution conv(v, theta, mode);
    ConvolutionResult out;
    out.values.reserve(queries.size());
    out.extremizers.reserve(queries.size());

    ConvolutionReport& rep = out.report;
    rep.theta = theta;
    rep.eta = eta;
    rep.holder_norm = discrete_holder_norm(v, eta).norm;
    rep.diameter = std::hypot(spec.domain().diameter(), spec.horizon());
    rep.omega = static_cast<double>(spec.dim()) * spec.h() +
                2.0 * std::sqrt(theta) * rep.holder_norm * std::pow(rep.diameter, eta);
    rep.region_margin = rep.omega + spec.stencil_range() * spec.h();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "U_theta^h = {p : d_e(p, boundary of box x (0,T)) >= %.6g}",
                  rep.region_margin);
    rep.region = buf;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (distance_to_cylinder_boundary(spec, spec.point(k)) >= rep.region_margin) ++rep.region_nodes;
    }
    for (const auto& q : queries) {
        const auto r = conv(q);
        out.values.push_back(r.value);
        out.extremizers.push_back(r.extremizer);
        rep.max_shift = std::max(rep.max_shift, euclidean_distance(q, spec.point(r.extremizer)));
    }
    return out;
}

ConvolutionValue x_convolution(const MeshFunction& u, double theta, const ParabolicPoint& q, double sign) {
    const MeshSpec& spec = u.spec();
    check_query(spec, q);
    if (!(theta > 0.0)) throw Error("theta must be positive");
    const int j = lattice_level(spec, q.t);
    std::vector<double> g(spec.spatial_count());
    std::vector<std::size_t> node(spec.spatial_count());
    for (std::size_t s = 0; s < g.size(); ++s) {
        node[s] = spec.linear_index(s, j);
        g[s] = sign * u[node[s]];
    }
    ConvolutionValue r = reduce_space(spec, std::move(g), std::move(node), q.x, theta);
    r.value *= sign;
    return r;
}

}  // namespace

MeshConvolution::MeshConvolution(const MeshFunction& v, double theta, ConvolutionMode mode)
    : spec_(v.spec()), theta_(theta), mode_(mode) {
    if (!(theta > 0.0)) throw Error("theta must be positive");
    const double sign = mode == ConvolutionMode::inf ? 1.0 : -1.0;
    const int J = spec_.time_levels();
    std::vector<double> times(static_cast<std::size_t>(J)), vals(static_cast<std::size_t>(J));
    for (int j = 1; j <= J; ++j) times[static_cast<std::size_t>(j - 1)] = spec_.time(j);
    time_envelopes_.reserve(spec_.spatial_count());
    for (std::size_t s = 0; s < spec_.spatial_count(); ++s) {
        for (int j = 1; j <= J; ++j) vals[static_cast<std::size_t>(j - 1)] = sign * v[spec_.linear_index(s, j)];
        time_envelopes_.emplace_back(times, vals, theta);
    }
}

ConvolutionValue MeshConvolution::operator()(const ParabolicPoint& q) const {
    check_query(spec_, q);
    std::vector<double> g(spec_.spatial_count());
    std::vector<std::size_t> node(spec_.spatial_count());
    for (std::size_t s = 0; s < g.size(); ++s) {
        const auto hit = time_envelopes_[s].evaluate(q.t);
        g[s] = hit.value;
        node[s] = spec_.linear_index(s, static_cast<int>(hit.source) + 1);
    }
    ConvolutionValue r = reduce_space(spec_, std::move(g), std::move(node), q.x, theta_);
    if (mode_ == ConvolutionMode::sup) r.value = -r.value;
    return r;
}

ConvolutionResult inf_convolution_mesh(const MeshFunction& v, double theta,
                                       std::span<const ParabolicPoint> queries, double eta) {
    return convolve(v, theta, queries, eta, ConvolutionMode::inf);
}

ConvolutionResult sup_convolution_mesh(const MeshFunction& v, double theta,
                                       std::span<const ParabolicPoint> queries, double eta) {
    return convolve(v, theta, queries, eta, ConvolutionMode::sup);
}

std::vector<ParabolicPoint> mesh_points(const MeshSpec& spec) {
    std::vector<ParabolicPoint> pts;
    pts.reserve(spec.node_count());
    for (std::size_t k = 0; k < spec.node_count(); ++k) pts.push_back(spec.point(k));
    return pts;
}

double distance_to_cylinder_boundary(const MeshSpec& spec, const ParabolicPoint& p) {
    double d = std::min(p.t, spec.horizon() - p.t);
    return std::max(0.0, std::min(d, spec.domain().distance_to_boundary(p.x)));
}

ConvolutionValue x_sup_convolution(const MeshFunction& u, double theta, const ParabolicPoint& q) {
    return x_convolution(u, theta, q, -1.0);
}

ConvolutionValue x_inf_convolution(const MeshFunction& u, double theta, const ParabolicPoint& q) {
    return x_convolution(u, theta, q, 1.0);
}

double x_lipschitz(const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    std::vector<std::vector<double>> xs;
    for (std::size_t s = 0; s < spec.spatial_count(); ++s) xs.push_back(spec.spatial_point(s));
    double L = 0.0;
    for (int j = 1; j <= spec.time_levels(); ++j) {
        for (std::size_t a = 0; a < xs.size(); ++a) {
            const double ua = u[spec.linear_index(a, j)];
            for (std::size_t b = a + 1; b < xs.size(); ++b) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < spec.dim(); ++k) d2 += (xs[a][k] - xs[b][k]) * (xs[a][k] - xs[b][k]);
                L = std::max(L, std::abs(ua - u[spec.linear_index(b, j)]) / std::sqrt(d2));
            }
        }
    }
    return L;
}

ConvolutionPropertyReport verify_convolution_properties(const MeshFunction& v, double theta, double eta) {
    const MeshSpec& spec = v.spec();
    const auto pts = mesh_points(spec);
    ConvolutionResult lo = inf_convolution_mesh(v, theta, pts, eta);
    const ConvolutionResult hi = sup_convolution_mesh(v, theta, pts, eta);

    ConvolutionPropertyReport rep;
    rep.report = lo.report;
    const double omega = rep.report.omega;
    const double norm = rep.report.holder_norm;
    rep.shift_bound_excess = -std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (lo.values[k] > v[k] || hi.values[k] < v[k]) ++rep.order_violations;
        const double dist = distance_to_cylinder_boundary(spec, pts[k]);
        for (std::size_t e : {lo.extremizers[k], hi.extremizers[k]}) {
            rep.shift_bound_excess =
                std::max(rep.shift_bound_excess, euclidean_distance(pts[k], pts[e]) - omega);
        }
        if (dist >= rep.report.region_margin) {
            const double slack = norm * std::pow(omega, eta);
            const double round = 1e-12 * (1.0 + std::abs(v[k]));
            if (lo.values[k] < v[k] - slack - round || hi.values[k] > v[k] + slack + round) {
                ++rep.lower_bound_violations;
            }
        }
    }

    // Semiconcavity along every lattice direction with |y| < N, at every node
    // where both neighbors exist. The inequality is exact for infima, so only
    // rounding slack is allowed.
    const Stencil st = Stencil::lattice(spec.dim(), spec.stencil_range());
    double vmax = 0.0;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        vmax = std::max({vmax, std::abs(lo.values[k]), std::abs(hi.values[k])});
    }
    const MeshFunction vm(spec, lo.values), vp(spec, hi.values);
    rep.max_second_difference = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        const NodeIndex base = spec.node(k);
        for (const auto& y : st.directions) {
            NodeIndex a = base, b = base;
            for (std::size_t i = 0; i < y.size(); ++i) {
                a.i[i] += y[i];
                b.i[i] -= y[i];
            }
            if (!spec.contains(a) || !spec.contains(b)) continue;
            const double y2 = std::inner_product(y.begin(), y.end(), y.begin(), 0) * spec.h() * spec.h();
            const double slack = 1e-12 * (1.0 + vmax) / y2;
            const double dm = delta2_y(vm, k, y);
            const double dp = delta2_y(vp, k, y);
            rep.max_second_difference = std::max(rep.max_second_difference, dm);
            ++rep.triples_tested;
            if (dm > 1.0 / theta + slack || dp < -1.0 / theta - slack) ++rep.semiconcavity_violations;
        }
    }
    if (rep.triples_tested == 0) rep.max_second_difference = 0.0;

    rep.time_bound = 3.0 * spec.horizon() / theta;
    rep.time_seminorm = std::max(time_holder_seminorm(vm, eta), time_holder_seminorm(vp, eta));
    rep.pass = rep.order_violations == 0 && rep.lower_bound_violations == 0 &&
               rep.semiconcavity_violations == 0 && rep.time_seminorm <= rep.time_bound;
    return rep;
}

}  // namespace parastep
