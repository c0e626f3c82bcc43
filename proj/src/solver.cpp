#include "parastep/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace parastep {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Spatial layout shared by every level that has interior nodes.
struct Layout {
    std::vector<std::size_t> interior;    // spatial indices
    std::vector<std::ptrdiff_t> offsets;  // spatial offset of +y per direction
    std::vector<double> weight;           // 1 / |h y|^2 per direction
    std::vector<char> is_interior;        // per spatial node
};

Layout make_layout(const SchemeDescriptor& S, const MeshSpec& spec, int level) {
    if (S.stencil().dim != spec.dim()) throw Error("scheme and mesh dimensions differ");
    if (S.stencil().range > spec.stencil_range()) throw Error("scheme stencil is wider than the mesh's N");
    Layout L;
    L.is_interior.assign(spec.spatial_count(), 0);
    for (std::size_t s = 0; s < spec.spatial_count(); ++s) {
        if (spec.is_interior(spec.linear_index(s, level))) {
            L.interior.push_back(s);
            L.is_interior[s] = 1;
        }
    }
    const double h2 = spec.h() * spec.h();
    for (std::size_t k = 0; k < S.stencil().size(); ++k) {
        const auto& y = S.stencil().directions[k];
        std::ptrdiff_t off = 0;
        for (std::size_t a = 0; a < y.size(); ++a) off += y[a] * spec.stride(a);
        L.offsets.push_back(off);
        L.weight.push_back(1.0 / (h2 * S.stencil().norm_squared(k)));
    }
    return L;
}

double step_tolerance(const SolveConfig& cfg, std::span<const double> boundary) {
    if (cfg.tolerance > 0.0) return cfg.tolerance;
    double sup = 0.0;
    for (double b : boundary) {
        if (std::isfinite(b)) sup = std::max(sup, std::abs(b));
    }
    return 1e-10 * (1.0 + sup);
}

// Residuals at interior nodes of w; returns the max magnitude. If `active`
// is non-null the realizing form per interior node is stored there.
double residuals(const SchemeDescriptor& S, const Layout& L, double tau, std::span<const double> w,
                 std::span<const double> prev, std::vector<double>& R, std::vector<double>& r,
                 std::vector<std::size_t>* active) {
    double maxres = 0.0;
    for (std::size_t q = 0; q < L.interior.size(); ++q) {
        const std::size_t p = L.interior[q];
        for (std::size_t k = 0; k < L.offsets.size(); ++k) {
            const auto o = L.offsets[k];
            r[k] = (w[p + o] + w[p - o] - 2.0 * w[p]) * L.weight[k];
        }
        R[q] = (w[p] - prev[p]) / tau - S.F_h(r);
        if (active) (*active)[q] = S.active_form(r);
        maxres = std::max(maxres, std::abs(R[q]));
    }
    return maxres;
}

bool damped_fixed_point(const SchemeDescriptor& S, const Layout& L, double tau, double omega, double tol,
                        int max_iter, std::vector<double>& w, std::span<const double> prev, StepStats& st,
                        bool record) {
    std::vector<double> R(L.interior.size()), r(L.offsets.size());
    for (int it = 0;; ++it) {
        const double res = residuals(S, L, tau, w, prev, R, r, nullptr);
        st.residual = res;
        if (record) st.history.push_back(res);
        if (res <= tol) return true;
        if (it >= max_iter) return false;
        for (std::size_t q = 0; q < L.interior.size(); ++q) w[L.interior[q]] -= omega * tau * R[q];
        ++st.iterations;
    }
}

// Howard iteration: freeze the realizing form per node, solve the linear
// system, repeat. Returns false if the policy stalls without converging.
bool policy_iteration(const SchemeDescriptor& S, const Layout& L, double tau, double tol, int max_outer,
                      std::vector<double>& w, std::span<const double> prev, StepStats& st) {
    const std::size_t m = L.interior.size();
    std::vector<std::ptrdiff_t> unknown(w.size(), -1);
    for (std::size_t q = 0; q < m; ++q) unknown[L.interior[q]] = static_cast<std::ptrdiff_t>(q);

    std::vector<double> R(m), r(L.offsets.size());
    std::vector<std::size_t> policy(m), last;
    for (int outer = 0; outer <= max_outer; ++outer) {
        st.residual = residuals(S, L, tau, w, prev, R, r, &policy);
        if (st.residual <= tol) return true;
        if (outer == max_outer || policy == last) return false;
        last = policy;

        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
        for (std::size_t q = 0; q < m; ++q) {
            const std::size_t p = L.interior[q];
            const auto g = S.form(policy[q]);
            double diag = 1.0 / tau;
            double b = prev[p] / tau;
            for (std::size_t k = 0; k < L.offsets.size(); ++k) {
                const double c = g[k] * L.weight[k];
                diag += 2.0 * c;
                for (std::ptrdiff_t nb : {static_cast<std::ptrdiff_t>(p) + L.offsets[k],
                                          static_cast<std::ptrdiff_t>(p) - L.offsets[k]}) {
                    const auto u = unknown[static_cast<std::size_t>(nb)];
                    if (u >= 0) trip.emplace_back(static_cast<int>(q), static_cast<int>(u), -c);
                    else b += c * w[static_cast<std::size_t>(nb)];
                }
            }
            trip.emplace_back(static_cast<int>(q), static_cast<int>(q), diag);
            rhs[static_cast<Eigen::Index>(q)] = b;
        }
        Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) return false;
        const Eigen::VectorXd x = lu.solve(rhs);
        for (std::size_t q = 0; q < m; ++q) w[L.interior[q]] = x[static_cast<Eigen::Index>(q)];
        ++st.iterations;
    }
    return false;
}

std::vector<double> step_with_layout(const SchemeDescriptor& S, const MeshSpec& spec, const Layout& L,
                                     std::span<const double> u_prev, std::span<const double> boundary,
                                     const SolveConfig& cfg, double tol, double omega, int level,
                                     StepStats& st, bool record) {
    std::vector<double> w(u_prev.begin(), u_prev.end());
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (L.is_interior[s]) continue;
        if (!std::isfinite(boundary[s])) throw Error("boundary slice is missing a boundary node");
        w[s] = boundary[s];
    }
    if (L.interior.empty()) return w;

    const double tau = spec.tau();
    bool ok = false;
    if (cfg.method == SolveMethod::policy_iteration) {
        ok = policy_iteration(S, L, tau, tol, std::min(cfg.max_iterations, 100), w, u_prev, st);
        if (!ok) {
            const int left = cfg.max_iterations - st.iterations;
            ok = damped_fixed_point(S, L, tau, omega, tol, left, w, u_prev, st, record);
        }
    } else {
        ok = damped_fixed_point(S, L, tau, omega, tol, cfg.max_iterations, w, u_prev, st, record);
    }
    if (!ok) throw SolveFailure(level, st.residual, st.iterations);
    return w;
}

double resolve_damping(const SolveConfig& cfg, const SchemeDescriptor& S, double h) {
    if (cfg.damping <= 0.0) return default_damping(S, h);
    if (cfg.damping > 1.0) throw Error("damping must lie in (0, 1]");
    return cfg.damping;
}

}  // namespace

const char* to_string(SolveMethod m) {
    return m == SolveMethod::policy_iteration ? "policy_iteration" : "damped_fixed_point";
}

SolveMethod solve_method_from_string(const std::string& s) {
    if (s == "damped_fixed_point" || s == "fixed_point") return SolveMethod::damped_fixed_point;
    if (s == "policy_iteration" || s == "policy") return SolveMethod::policy_iteration;
    throw Error("unknown solver method '" + s + "'");
}

BoundaryData BoundaryData::from_function(const MeshSpec& spec,
                                         const std::function<double(const ParabolicPoint&)>& f) {
    BoundaryData b;
    b.provenance = Provenance::exact_solution;
    b.values.assign(spec.node_count(), kNaN);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (!spec.is_interior(k)) b.values[k] = f(spec.point(k));
    }
    b.validate(spec);
    return b;
}

BoundaryData BoundaryData::from_table(const MeshFunction& table) {
    const MeshSpec& spec = table.spec();
    BoundaryData b;
    b.provenance = Provenance::supplied_table;
    b.values.assign(spec.node_count(), kNaN);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (!spec.is_interior(k)) b.values[k] = table[k];
    }
    return b;
}

void BoundaryData::validate(const MeshSpec& spec) const {
    if (values.size() != spec.node_count()) throw Error("boundary data does not match the mesh");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!spec.is_interior(k) && !std::isfinite(values[k])) {
            throw Error("boundary data does not cover every boundary node");
        }
    }
}

double BoundaryData::sup_abs() const {
    double s = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) s = std::max(s, std::abs(v));
    }
    return s;
}

double default_damping(const SchemeDescriptor& S, double h) {
    const double tau = h * h;
    double sum = 0.0;
    for (std::size_t k = 0; k < S.stencil().size(); ++k) sum += 2.0 / (h * h * S.stencil().norm_squared(k));
    return 1.0 / (1.0 + tau * S.Lambda0() * sum);
}

long SolveReport::total_iterations() const {
    long s = 0;
    for (int i : iterations_per_step) s += i;
    return s;
}

SolveFailure::SolveFailure(int level, double residual, int iterations)
    : Error("solver did not converge at time level " + std::to_string(level) + " after " +
            std::to_string(iterations) + " iterations (residual " + std::to_string(residual) + ")"),
      level_(level),
      residual_(residual) {}

std::vector<double> implicit_step(const SchemeDescriptor& S, const MeshSpec& spec, int level,
                                  std::span<const double> u_prev, std::span<const double> boundary,
                                  const SolveConfig& cfg, StepStats* stats, bool record_history) {
    if (level < 2 || level > spec.time_levels()) throw Error("implicit_step needs 2 <= level <= J");
    if (u_prev.size() != spec.spatial_count() || boundary.size() != spec.spatial_count()) {
        throw Error("slice sizes do not match the mesh");
    }
    for (double v : u_prev) {
        if (!std::isfinite(v)) throw Error("previous level has non-finite values");
    }
    const Layout L = make_layout(S, spec, level);
    StepStats local;
    StepStats& st = stats ? *stats : local;
    st = {};
    return step_with_layout(S, spec, L, u_prev, boundary, cfg, step_tolerance(cfg, boundary),
                            resolve_damping(cfg, S, spec.h()), level, st, record_history);
}

std::pair<MeshFunction, SolveReport> solve(const SchemeDescriptor& S, const MeshSpec& spec,
                                           const BoundaryData& boundary, const SolveConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    boundary.validate(spec);
    SolveReport rep;
    rep.method = cfg.method;
    rep.tolerance = cfg.tolerance > 0.0 ? cfg.tolerance : 1e-10 * (1.0 + boundary.sup_abs());
    rep.damping = resolve_damping(cfg, S, spec.h());
    SolveConfig c = cfg;
    c.tolerance = rep.tolerance;

    const std::size_t P = spec.spatial_count();
    std::vector<double> u(spec.node_count());
    const Layout empty = make_layout(S, spec, 1);
    std::optional<Layout> inner;
    for (int j = 1; j <= spec.time_levels(); ++j) {
        const std::size_t base = static_cast<std::size_t>(j - 1) * P;
        std::span<const double> b(boundary.values.data() + base, P);
        if (j == 1) {
            std::copy(b.begin(), b.end(), u.begin());
            rep.iterations_per_step.push_back(0);
            continue;
        }
        const bool has_interior = j >= spec.stencil_range() * spec.stencil_range();
        if (has_interior && !inner) inner = make_layout(S, spec, j);
        const Layout& L = has_interior ? *inner : empty;
        StepStats st;
        std::span<const double> prev(u.data() + base - P, P);
        const auto w = step_with_layout(S, spec, L, prev, b, c, rep.tolerance, rep.damping, j, st, false);
        std::copy(w.begin(), w.end(), u.begin() + static_cast<std::ptrdiff_t>(base));
        rep.iterations_per_step.push_back(st.iterations);
        rep.max_residual = std::max(rep.max_residual, st.residual);
    }
    rep.converged = rep.max_residual <= rep.tolerance;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {MeshFunction(spec, std::move(u)), rep};
}

double residual_sweep(const SchemeDescriptor& S, const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    double res = 0.0;
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        if (spec.is_interior(k)) res = std::max(res, std::abs(apply_scheme(S, u, k)));
    }
    return res;
}

}  // namespace parastep
