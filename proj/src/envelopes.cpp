#include "parastep/envelopes.hpp"

#include <algorithm>
#include <cmath>

#include "parastep/error.hpp"
#include "parastep/lp.hpp"

namespace parastep {

namespace {

// Lower hull of (i, m_i), i = 0..L-1, evaluated at every i. Collinear points
// stay on the hull so their values are kept verbatim.
void hull_1d(std::span<const double> m, std::span<double> out) {
    const std::size_t L = m.size();
    std::vector<std::size_t> h;
    for (std::size_t i = 0; i < L; ++i) {
        while (h.size() >= 2) {
            const std::size_t a = h[h.size() - 2], b = h.back();
            const double cross = static_cast<double>(b - a) * (m[i] - m[a]) -
                                 (m[b] - m[a]) * static_cast<double>(i - a);
            if (cross < 0.0) h.pop_back();
            else break;
        }
        h.push_back(i);
    }
    for (std::size_t s = 0; s + 1 < h.size(); ++s) {
        const std::size_t a = h[s], b = h[s + 1];
        out[a] = m[a];
        for (std::size_t i = a + 1; i < b; ++i) {
            const double v = m[a] + (m[b] - m[a]) * static_cast<double>(i - a) / static_cast<double>(b - a);
            out[i] = std::min(v, m[i]);
        }
    }
    out[h.back()] = m[h.back()];
}

// min sum_k lambda_k m_k  s.t.  sum lambda = 1, sum lambda_k (i_k - i_x) = 0, lambda >= 0.
double hull_node_lp(const MeshSpec& spec, const std::vector<std::vector<int>>& idx, std::span<const double> m,
                    std::size_t x) {
    const auto n = static_cast<Eigen::Index>(spec.dim());
    const auto S = static_cast<Eigen::Index>(m.size());
    Matrix A(n + 1, S);
    Vector c(S);
    for (Eigen::Index k = 0; k < S; ++k) {
        A(0, k) = 1.0;
        for (Eigen::Index d = 0; d < n; ++d) {
            A(d + 1, k) = idx[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] -
                          idx[x][static_cast<std::size_t>(d)];
        }
        c[k] = m[static_cast<std::size_t>(k)];
    }
    Vector b = Vector::Zero(n + 1);
    b[0] = 1.0;

    // Start from the node itself plus one axis neighbor per direction.
    std::vector<int> basis{static_cast<int>(x)};
    for (std::size_t d = 0; d < spec.dim(); ++d) {
        std::vector<int> nb = idx[x];
        nb[d] += nb[d] < spec.cells(d) ? 1 : -1;
        basis.push_back(static_cast<int>(spec.spatial_index(nb)));
    }
    const LpResult r = solve_lp(A, b, c, basis);
    if (r.status != LpStatus::optimal) throw Error("convex envelope LP failed");
    return std::min(r.objective, m[x]);
}

}  // namespace

std::vector<double> lower_convex_envelope_slice(const MeshSpec& spec, std::span<const double> values) {
    const std::size_t S = spec.spatial_count();
    if (values.size() != S) throw Error("slice size does not match the mesh");
    std::vector<double> out(S);
    if (spec.dim() == 1) {
        hull_1d(values, out);
        return out;
    }
    std::vector<std::vector<int>> idx(S);
    for (std::size_t s = 0; s < S; ++s) idx[s] = spec.spatial_multi_index(s);
    for (std::size_t s = 0; s < S; ++s) out[s] = hull_node_lp(spec, idx, values, s);
    return out;
}

MeshFunction lower_monotone_envelope(const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    const std::size_t S = spec.spatial_count();
    std::vector<double> run(S), out(spec.node_count());
    for (int j = 1; j <= spec.time_levels(); ++j) {
        const std::size_t base = static_cast<std::size_t>(j - 1) * S;
        for (std::size_t s = 0; s < S; ++s) run[s] = j == 1 ? u[s] : std::min(run[s], u[base + s]);
        const auto g = lower_convex_envelope_slice(spec, run);
        std::copy(g.begin(), g.end(), out.begin() + static_cast<std::ptrdiff_t>(base));
    }
    return MeshFunction(spec, std::move(out));
}

MeshFunction upper_monotone_envelope(const MeshFunction& u) {
    std::vector<double> neg(u.values().begin(), u.values().end());
    for (double& v : neg) v = -v;
    const MeshFunction g = lower_monotone_envelope(MeshFunction(u.spec(), std::move(neg)));
    std::vector<double> out(g.values().begin(), g.values().end());
    for (double& v : out) v = -v;
    return MeshFunction(u.spec(), std::move(out));
}

ContactSet contact_set(const MeshFunction& u, const MeshFunction& gamma, double tol) {
    if (!(u.spec() == gamma.spec())) throw Error("contact set needs functions on the same mesh");
    const MeshSpec& spec = u.spec();
    ContactSet cs;
    cs.tolerance = tol >= 0.0 ? tol : 1e-9 * (1.0 + u.sup_abs());
    cs.mask.assign(spec.node_count(), 0);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (std::abs(u[k] - gamma[k]) <= cs.tolerance) {
            cs.mask[k] = 1;
            cs.nodes.push_back(k);
        }
    }
    cs.measure = static_cast<double>(cs.nodes.size()) * std::pow(spec.h(), static_cast<double>(spec.dim() + 2));
    return cs;
}

double estimate_regularity_constant(const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    const std::size_t S = spec.spatial_count();
    double K = 0.0;
    for (std::size_t k = S; k < spec.node_count(); ++k) K = std::max(K, std::abs(u[k] - u[k - S]) / spec.tau());
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        const NodeIndex n = spec.node(k);
        for (std::size_t d = 0; d < spec.dim(); ++d) {
            if (n.i[d] == 0 || n.i[d] == spec.cells(d)) continue;
            const auto off = static_cast<std::size_t>(spec.stride(d));
            const double d2 = (u[k + off] + u[k - off] - 2.0 * u[k]) / (spec.h() * spec.h());
            K = std::max(K, d2);
        }
    }
    return K;
}

AbpDiagnostic abp_diagnostic(const MeshFunction& u, std::optional<double> K) {
    const MeshSpec& spec = u.spec();
    const std::size_t n = spec.dim();
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        const NodeIndex node = spec.node(k);
        bool on_boundary = node.j == 1;
        for (std::size_t d = 0; d < n; ++d) on_boundary = on_boundary || node.i[d] == 0 || node.i[d] == spec.cells(d);
        if (on_boundary && u[k] < 0.0) throw Error("abp_diagnostic needs u >= 0 on the parabolic boundary");
    }

    AbpDiagnostic out;
    out.rho = 0.5 * spec.domain().min_side();
    out.K = K ? *K : estimate_regularity_constant(u);
    if (out.K < 0.0) throw Error("regularity constant must be nonnegative");

    // Doubled box: extend each side by half its cell count. Extending in time
    // by zeros would not change Gamma (the running minimum is already <= 0),
    // so the time range is kept.
    Box big = spec.domain();
    std::vector<int> shift(n);
    for (std::size_t d = 0; d < n; ++d) {
        shift[d] = (spec.cells(d) + 1) / 2;
        big.lower[d] -= shift[d] * spec.h();
        big.upper[d] += shift[d] * spec.h();
    }
    const MeshSpec dspec(spec.h(), big, spec.horizon() + 0.25 * spec.tau(), spec.stencil_range());
    std::vector<double> w(dspec.node_count(), 0.0);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        NodeIndex node = spec.node(k);
        for (std::size_t d = 0; d < n; ++d) node.i[d] += shift[d];
        w[dspec.linear_index(node)] = std::min(u[k], 0.0);
    }
    const MeshFunction gamma_big = lower_monotone_envelope(MeshFunction(dspec, std::move(w)));

    std::vector<double> gamma(spec.node_count());
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        NodeIndex node = spec.node(k);
        for (std::size_t d = 0; d < n; ++d) node.i[d] += shift[d];
        gamma[k] = gamma_big[dspec.linear_index(node)];
    }
    const ContactSet cs = contact_set(u, MeshFunction(spec, std::move(gamma)));

    for (double v : u.values()) out.lhs = std::max(out.lhs, -v);
    out.contact_nodes = cs.nodes.size();
    out.contact_measure = cs.measure;
    const double dn = static_cast<double>(n);
    out.rhs_core = std::pow(out.rho, dn / (dn + 1.0)) * std::pow(cs.measure, 1.0 / (dn + 1.0)) * out.K;
    out.ratio = out.lhs == 0.0 ? 0.0 : out.lhs / out.rhs_core;
    return out;
}

}  // namespace parastep
