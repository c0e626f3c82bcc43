#include "parastep/viscosity.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parastep/convolutions.hpp"
#include "parastep/error.hpp"
#include "parastep/lp.hpp"

namespace parastep {

// --- Paraboloid ---------------------------------------------------------------

Paraboloid Paraboloid::zero(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return {0.0, Vector::Zero(k), 0.0, Vector::Zero(k), Matrix::Zero(k, k)};
}

Paraboloid Paraboloid::about(const ParabolicPoint& o, double c0, const Vector& l, double m, const Vector& a,
                             const Matrix& Q) {
    const auto n = static_cast<Eigen::Index>(o.dim());
    if (l.size() != n || a.size() != n || Q.rows() != n || Q.cols() != n) {
        throw Error("paraboloid coefficients do not match the origin's dimension");
    }
    const Vector x = Eigen::Map<const Vector>(o.x.data(), n);
    const double t = o.t;
    Paraboloid P;
    P.c = c0 - l.dot(x) - m * t + a.dot(x) * t + x.dot(Q * x);
    P.l = l - a * t - 2.0 * Q * x;
    P.m = m - a.dot(x);
    P.a = a;
    P.Q = Q;
    return P;
}

double Paraboloid::operator()(const ParabolicPoint& p) const {
    if (p.dim() != dim()) throw Error("point dimension does not match the paraboloid");
    const Vector x = Eigen::Map<const Vector>(p.x.data(), static_cast<Eigen::Index>(p.dim()));
    return c + l.dot(x) + m * p.t + a.dot(x) * p.t + x.dot(Q * x);
}

double Paraboloid::time_derivative(std::span<const double> x) const {
    if (x.size() != dim()) throw Error("point dimension does not match the paraboloid");
    return m + a.dot(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
}

bool Paraboloid::in_P_M_plus(double M, double tol) const {
    const auto n = Q.rows();
    return a.cwiseAbs().maxCoeff() <= tol && std::abs(m) <= M + tol &&
           (Q - 0.5 * M * Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

bool Paraboloid::in_P_M_minus(double M, double tol) const {
    Paraboloid neg = *this;
    neg.c = -c;
    neg.l = -l;
    neg.m = -m;
    neg.a = -a;
    neg.Q = -Q;
    return neg.in_P_M_plus(M, tol);
}

double evaluate_paraboloid(const Paraboloid& P, const ParabolicPoint& p) { return P(p); }

std::pair<double, Matrix> paraboloid_derivatives(const Paraboloid& P, const ParabolicPoint& p) {
    return {P.time_derivative(p.x), P.hessian()};
}

const char* to_string(Side s) { return s == Side::super ? "super" : "sub"; }

// --- falsifier -------------------------------------------------------------------

namespace {

struct CylinderPoint {
    Vector z;
    double tau;  // s - t <= 0
    double dv;   // v(y,s) - v(x,t)
};

bool cylinder_inside_domain(const MeshSpec& spec, const ParabolicPoint& p, double delta) {
    return spec.domain().distance_to_boundary(p.x) >= delta && p.t - delta * delta >= -1e-12;
}

// Central gradient and Hessian at a node whose axis and diagonal neighbors exist.
void discrete_derivatives(const MeshFunction& v, std::size_t k, Vector& grad, Matrix& hess) {
    const MeshSpec& spec = v.spec();
    const std::size_t n = spec.dim();
    const double h = spec.h();
    grad = Vector::Zero(static_cast<Eigen::Index>(n));
    hess = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto si = spec.stride(i);
        const auto ii = static_cast<Eigen::Index>(i);
        const double up = v[k + si], dn = v[k - si];
        grad[ii] = (up - dn) / (2.0 * h);
        hess(ii, ii) = (up + dn - 2.0 * v[k]) / (h * h);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto sj = spec.stride(j);
            const auto jj = static_cast<Eigen::Index>(j);
            const double mixed = (v[k + si + sj] - v[k + si - sj] - v[k - si + sj] + v[k - si - sj]) / (4.0 * h * h);
            hess(ii, jj) = hess(jj, ii) = mixed;
        }
    }
}

}  // namespace

FalsifierReport delta_falsifier(const MeshFunction& v, const NonlinearityDescriptor& F,
                                const FalsifierConfig& cfg) {
    const MeshSpec& spec = v.spec();
    const std::size_t n = spec.dim();
    if (F.dim() != n) throw Error("nonlinearity and mesh dimensions differ");
    const double h = spec.h();
    if (cfg.delta < h * std::sqrt(static_cast<double>(n) + 1.0) - 1e-12) {
        throw Error("delta too small for grid: must be at least the parabolic diameter of a cell");
    }
    if (cfg.samples_per_node < 1) throw Error("samples_per_node must be positive");

    FalsifierReport rep;
    rep.side = cfg.side;
    rep.delta = cfg.delta;
    rep.touch_tolerance = cfg.touch_tolerance >= 0.0 ? cfg.touch_tolerance : 1e-10 * (1.0 + v.sup_abs());
    rep.violation_tolerance = cfg.violation_tolerance;
    rep.extreme_margin = cfg.side == Side::super ? std::numeric_limits<double>::infinity()
                                                 : -std::numeric_limits<double>::infinity();
    // Accept same-time ordering at half the tolerance so replays have headroom for rounding.
    const double accept = 0.5 * rep.touch_tolerance;
    const double sigma = cfg.side == Side::super ? 1.0 : -1.0;
    const auto ni = static_cast<Eigen::Index>(n);
    const Matrix I = Matrix::Identity(ni, ni);

    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (cylinder_inside_domain(spec, spec.point(k), cfg.delta)) nodes.push_back(k);
    }
    rep.nodes_tested = nodes.size();
    if (nodes.empty()) {
        rep.extreme_margin = 0.0;
        return rep;
    }

    // Scales for the random family.
    const double Lx = std::max(1.0, x_lipschitz(v));
    double Hs = 1.0;
    std::vector<Vector> grads(nodes.size());
    std::vector<Matrix> hessians(nodes.size());
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        discrete_derivatives(v, nodes[q], grads[q], hessians[q]);
        Hs = std::max(Hs, hessians[q].cwiseAbs().maxCoeff());
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double shifts[] = {0.0, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    const double openings[] = {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0};
    const double lscales[] = {1e-3, 1e-2, 1e-1};

    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const std::size_t k = nodes[q];
        const ParabolicPoint p = spec.point(k);
        const double vc = v[k];
        std::vector<CylinderPoint> same, past;
        for (std::size_t j : cylinder_nodes(Cylinder{p, cfg.delta, Orientation::backward}, spec)) {
            if (j == k) continue;
            const ParabolicPoint y = spec.point(j);
            CylinderPoint cp{Vector(ni), y.t - p.t, v[j] - vc};
            for (Eigen::Index d = 0; d < ni; ++d) cp.z[d] = y.x[static_cast<std::size_t>(d)] - p.x[static_cast<std::size_t>(d)];
            (std::abs(cp.tau) < 0.5 * spec.tau() ? same : past).push_back(std::move(cp));
        }
        if (past.empty()) throw Error("delta too small for grid: cylinder has no earlier nodes");

        // Candidate (l, Q) pairs; all random parts carry the side sign so that
        // the sub side on -v mirrors the super side on v exactly.
        std::vector<std::pair<Vector, Matrix>> cand;
        const Vector l0 = grads[q];
        const Matrix Q0 = 0.5 * hessians[q];
        const double hq = std::max(1.0, Q0.cwiseAbs().maxCoeff());
        for (double s : shifts) cand.emplace_back(l0, Matrix(Q0 - sigma * s * hq * I));
        for (double M : openings) {
            cand.emplace_back(l0, Matrix(-sigma * 0.5 * M * I));
            cand.emplace_back(l0, Matrix(sigma * 0.5 * M * I));
        }
        cand.resize(std::min<std::size_t>(cand.size(), static_cast<std::size_t>(cfg.samples_per_node)));
        std::size_t draw = 0;
        while (cand.size() < static_cast<std::size_t>(cfg.samples_per_node)) {
            Vector xi(ni);
            for (Eigen::Index d = 0; d < ni; ++d) xi[d] = unif(rng);
            Matrix R(ni, ni);
            for (Eigen::Index r = 0; r < ni; ++r)
                for (Eigen::Index c = 0; c <= r; ++c) R(r, c) = R(c, r) = unif(rng);
            const double ls = lscales[draw % 3];
            const double qs = std::abs(unif(rng));
            cand.emplace_back(Vector(l0 + sigma * Lx * ls * xi),
                              Matrix(Q0 + sigma * (Hs * 0.05 * R - qs * hq * I)));
            ++draw;
        }

        std::optional<Certificate> worst;
        for (const auto& [l, Q] : cand) {
            ++rep.candidates;
            bool ok = true;
            for (const auto& cp : same) {
                const double e = cp.dv - l.dot(cp.z) - cp.z.dot(Q * cp.z);
                if (sigma * e < -accept) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            ++rep.touching;
            // super: m >= -e/|tau| for every earlier node; sub: m <= -e/|tau|.
            double m = sigma > 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
            for (const auto& cp : past) {
                const double e = cp.dv - l.dot(cp.z) - cp.z.dot(Q * cp.z);
                const double bound = -e / std::abs(cp.tau);
                m = sigma > 0 ? std::max(m, bound) : std::min(m, bound);
            }
            const double margin = m - F(Matrix(2.0 * Q));
            rep.extreme_margin = sigma > 0 ? std::min(rep.extreme_margin, margin) : std::max(rep.extreme_margin, margin);
            const bool bad = sigma > 0 ? margin < -rep.violation_tolerance : margin > rep.violation_tolerance;
            if (bad && (!worst || sigma * margin < sigma * worst->margin)) {
                Certificate c;
                c.node = k;
                c.point = p;
                c.side = cfg.side;
                c.margin = margin;
                c.P = Paraboloid::about(p, vc, l, m, Vector::Zero(ni), Q);
                worst = std::move(c);
            }
        }
        if (worst) rep.violations.push_back(std::move(*worst));
    }
    if (rep.touching == 0) rep.extreme_margin = 0.0;
    return rep;
}

ReplayResult replay_certificate(const MeshFunction& v, const NonlinearityDescriptor& F, const Certificate& c,
                                double delta, double touch_tolerance, double violation_tolerance) {
    const MeshSpec& spec = v.spec();
    const double sigma = c.side == Side::super ? 1.0 : -1.0;
    ReplayResult r;
    r.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t j : cylinder_nodes(Cylinder{c.point, delta, Orientation::backward}, spec)) {
        r.max_excess = std::max(r.max_excess, sigma * (c.P(spec.point(j)) - v[j]));
    }
    const auto k = spec.locate(c.point);
    if (!k) throw Error("certificate point is not a mesh node");
    r.center_gap = std::abs(c.P(c.point) - v[*k]);
    r.margin = c.P.time_derivative(c.point.x) - F(c.P.hessian());
    r.touches = r.max_excess <= touch_tolerance && r.center_gap <= touch_tolerance && c.P.in_P_infinity();
    r.violates = r.touches && (sigma > 0 ? r.margin < -violation_tolerance : r.margin > violation_tolerance);
    return r;
}

// --- expansions ------------------------------------------------------------------

namespace {

struct RegionPoint {
    Vector z;
    double tau;
    double du;
};

std::vector<RegionPoint> region_points(const MeshFunction& u, std::size_t node, const Cylinder& region) {
    const MeshSpec& spec = u.spec();
    if (region.center.dim() != spec.dim()) throw Error("region dimension does not match the mesh");
    const ParabolicPoint p = spec.point(node);
    if (!region.contains(p)) throw Error("node is not inside the region");
    const auto ni = static_cast<Eigen::Index>(spec.dim());
    std::vector<RegionPoint> pts;
    for (std::size_t j : cylinder_nodes(region, spec)) {
        if (j == node) continue;
        const ParabolicPoint y = spec.point(j);
        if (y.t > p.t + 0.5 * spec.tau()) continue;
        RegionPoint rp{Vector(ni), y.t - p.t, u[j] - u[node]};
        for (Eigen::Index d = 0; d < ni; ++d) rp.z[d] = y.x[static_cast<std::size_t>(d)] - p.x[static_cast<std::size_t>(d)];
        pts.push_back(std::move(rp));
    }
    return pts;
}

double cubic_weight(const RegionPoint& r) {
    const double z2 = r.z.squaredNorm();
    const double z = std::sqrt(z2);
    return z2 * z + z2 * std::abs(r.tau) + r.tau * r.tau;
}

// Feasibility of { p : p.z_k >= g_k } via the LP dual
//   min -sum mu_k g_k  s.t. sum mu_k z_k = 0, sum mu_k = 1, mu >= 0.
// Returns the optimal value s = max_p min_k (p.z_k - g_k) (infinite if unbounded) and a witness p.
double max_min_slack(const std::vector<Vector>& z, const std::vector<double>& g, Eigen::Index n, Vector& p) {
    const auto K = static_cast<Eigen::Index>(z.size());
    Matrix A(n + 1, K);
    Vector c(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        A.col(k).head(n) = z[static_cast<std::size_t>(k)];
        A(n, k) = 1.0;
        c[k] = -g[static_cast<std::size_t>(k)];
    }
    Vector b = Vector::Zero(n + 1);
    b[n] = 1.0;
    const LpResult r = solve_lp(A, b, c);
    if (r.status == LpStatus::infeasible) {
        // 0 is not in the convex hull of the z_k: a separating direction makes every slack large.
        p = Vector::Zero(n);
        return std::numeric_limits<double>::infinity();
    }
    if (r.status != LpStatus::optimal) throw Error("expansion LP failed");
    p = -r.duals.head(n);
    return r.objective;
}

}  // namespace

PsiMembership psi_M_membership(const MeshFunction& u, std::size_t node, double M, const Cylinder& region) {
    if (!(M > 0.0)) throw Error("M must be positive");
    const MeshSpec& spec = u.spec();
    const std::size_t n = spec.dim();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto pts = region_points(u, node, region);
    const Eigen::Index params = 2 * ni + 1 + ni * (ni + 1) / 2;
    if (static_cast<Eigen::Index>(pts.size()) < params) {
        throw Error("region has fewer points than the expansion has parameters");
    }

    // Basis: z (n), tau, z tau (n), z_i z_j (i <= j).
    const auto K = static_cast<Eigen::Index>(pts.size());
    Matrix Phi(K, params);
    Vector rhs(K), w(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& r = pts[static_cast<std::size_t>(k)];
        Eigen::Index c = 0;
        for (Eigen::Index d = 0; d < ni; ++d) Phi(k, c++) = r.z[d];
        Phi(k, c++) = r.tau;
        for (Eigen::Index d = 0; d < ni; ++d) Phi(k, c++) = r.z[d] * r.tau;
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = i; j < ni; ++j) Phi(k, c++) = (i == j ? 1.0 : 2.0) * r.z[i] * r.z[j];
        w[k] = cubic_weight(r);
        rhs[k] = r.du;
    }
    Matrix A = Phi;
    for (Eigen::Index k = 0; k < K; ++k) A.row(k) /= w[k];
    const Vector b = rhs.cwiseQuotient(w);

    // Drop parameters the points cannot identify (e.g. time terms on a single level).
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()[i]);
    std::sort(keep.begin(), keep.end());

    // Chebyshev fit through its LP dual:
    //   min -sum b_k (mu_k - nu_k)  s.t.  sum a_k (mu_k - nu_k) = 0, sum (mu_k + nu_k) = 1.
    const auto r = static_cast<Eigen::Index>(keep.size());
    Matrix L(r + 1, 2 * K);
    Vector cost(2 * K);
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index i = 0; i < r; ++i) {
            L(i, k) = A(k, keep[static_cast<std::size_t>(i)]);
            L(i, K + k) = -A(k, keep[static_cast<std::size_t>(i)]);
        }
        L(r, k) = L(r, K + k) = 1.0;
        cost[k] = -b[k];
        cost[K + k] = b[k];
    }
    Vector lb = Vector::Zero(r + 1);
    lb[r] = 1.0;
    const LpResult lp = solve_lp(L, lb, cost);
    if (lp.status != LpStatus::optimal) throw Error("expansion fit LP failed");
    Vector theta = Vector::Zero(params);
    for (Eigen::Index i = 0; i < r; ++i) theta[keep[static_cast<std::size_t>(i)]] = -lp.duals[i];

    PsiMembership out;
    out.points = pts.size();
    const Vector res = rhs - Phi * theta;
    const double nM = static_cast<double>(n) * M;
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < K; ++k) {
        out.worst_ratio = std::max(out.worst_ratio, std::abs(res[k]) / w[k]);
        out.worst_excess = std::max(out.worst_excess, std::abs(res[k]) - nM * w[k]);
    }
    out.member = out.worst_ratio <= nM * (1.0 + 1e-9) + 1e-12;

    Vector l = theta.head(ni), a = theta.segment(ni + 1, ni);
    Matrix Q(ni, ni);
    Eigen::Index c = 2 * ni + 1;
    for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = i; j < ni; ++j) Q(i, j) = Q(j, i) = theta[c++];
    out.P = Paraboloid::about(spec.point(node), 0.0, l, theta[ni], a, Q);
    return out;
}

GMembership g_M_membership(const MeshFunction& u, std::size_t node, double M, const Cylinder& region) {
    if (!(M > 0.0)) throw Error("M must be positive");
    const auto ni = static_cast<Eigen::Index>(u.spec().dim());
    const auto pts = region_points(u, node, region);
    std::vector<Vector> z, zz;
    std::vector<double> gu, gl, both;
    for (const auto& r : pts) {
        const double budget = M * std::abs(r.tau) + 0.5 * M * r.z.squaredNorm();
        z.push_back(r.z);
        gu.push_back(r.du - budget);   // p.z >= du - budget
        gl.push_back(-r.du - budget);  // (-p).z >= -du - budget
    }
    GMembership g;
    const double tol = 1e-12 * (1.0 + u.sup_abs());
    Vector p;
    if (pts.empty()) {
        g.upper = g.lower = g.member = g.expansion = true;
        g.p = Vector::Zero(ni);
        return g;
    }
    g.upper = max_min_slack(z, gu, ni, p) >= -tol;
    g.lower = max_min_slack(z, gl, ni, p) >= -tol;
    g.member = g.upper && g.lower;

    // One p for both sides: columns (z, 1) with g_upper and (-z, 1) with g_lower.
    zz = z;
    both = gu;
    for (std::size_t k = 0; k < z.size(); ++k) {
        zz.push_back(-z[k]);
        both.push_back(gl[k]);
    }
    const double s = max_min_slack(zz, both, ni, p);
    g.p = p;
    g.expansion = s >= -tol;
    g.expansion_margin = std::isfinite(s) ? s : 0.0;
    return g;
}

GoodSetReport good_set_measure(const MeshFunction& u, std::span<const double> Ms, const KBox& box,
                               const Cylinder& region) {
    const MeshSpec& spec = u.spec();
    GoodSetReport rep;
    rep.M.assign(Ms.begin(), Ms.end());
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (box.contains(spec.point(k))) nodes.push_back(k);
    }
    if (nodes.empty()) throw Error("K_r box contains no mesh nodes");
    rep.box_nodes = nodes.size();
    const double nn = static_cast<double>(spec.dim());
    for (std::size_t k : nodes) rep.node_ratios.push_back(psi_M_membership(u, k, 1.0, region).worst_ratio);

    const double cell = std::pow(spec.h(), nn + 2.0);
    std::vector<double> lx, ly;
    for (double M : rep.M) {
        std::size_t bad = 0;
        for (double r : rep.node_ratios) {
            if (!(r <= nn * M * (1.0 + 1e-9) + 1e-12)) ++bad;
        }
        rep.bad_fraction.push_back(static_cast<double>(bad) / static_cast<double>(nodes.size()));
        rep.bad_measure.push_back(static_cast<double>(bad) * cell);
        if (bad > 0) {
            lx.push_back(std::log(M));
            ly.push_back(std::log(rep.bad_measure.back()));
        }
    }
    if (lx.size() >= 2) {
        const double m = static_cast<double>(lx.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i] / m;
            my += ly[i] / m;
        }
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        if (sxx > 0.0) {
            rep.fitted = true;
            rep.slope = sxy / sxx;
            double ssr = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                const double e = ly[i] - my - rep.slope * (lx[i] - mx);
                ssr += e * e;
            }
            rep.slope_stderr = lx.size() > 2 ? std::sqrt(ssr / (m - 2.0) / sxx)
                                             : std::numeric_limits<double>::quiet_NaN();
            rep.slope_ci_low = rep.slope - 2.0 * rep.slope_stderr;
            rep.slope_ci_high = rep.slope + 2.0 * rep.slope_stderr;
        }
    }
    return rep;
}

}  // namespace parastep
