#include "parastep/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "parastep/error.hpp"

namespace parastep {

namespace {

const char* kNotRepresentable = "stencil cannot represent F; enlarge N or supply bellman_isaacs form";

bool canonical(const std::vector<int>& y) {
    for (int v : y) {
        if (v != 0) return v > 0;
    }
    return false;
}

// Directions grouped by unit vector (reduced integer vector).
struct DirectionClass {
    std::vector<int> reduced;
    Vector unit;
    std::vector<std::size_t> members;
};

std::vector<DirectionClass> direction_classes(const Stencil& st) {
    std::vector<DirectionClass> classes;
    std::map<std::vector<int>, std::size_t> lookup;
    for (std::size_t k = 0; k < st.size(); ++k) {
        const auto& y = st.directions[k];
        int g = 0;
        for (int v : y) g = std::gcd(g, std::abs(v));
        std::vector<int> red(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) red[i] = y[i] / g;
        auto [it, inserted] = lookup.try_emplace(red, classes.size());
        if (inserted) {
            DirectionClass c;
            c.reduced = red;
            c.unit = Vector(static_cast<Eigen::Index>(red.size()));
            for (std::size_t i = 0; i < red.size(); ++i) c.unit[static_cast<Eigen::Index>(i)] = red[i];
            c.unit.normalize();
            classes.push_back(std::move(c));
        }
        classes[it->second].members.push_back(k);
    }
    return classes;
}

int dot(const std::vector<int>& a, const std::vector<int>& b) {
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// All sets of n mutually orthogonal classes, in lexicographic order of class index.
std::vector<std::vector<std::size_t>> orthogonal_frames(const std::vector<DirectionClass>& classes,
                                                        std::size_t n) {
    std::vector<std::vector<std::size_t>> frames;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() == n) {
            frames.push_back(cur);
            return;
        }
        for (std::size_t c = start; c < classes.size(); ++c) {
            bool ok = true;
            for (std::size_t f : cur) ok = ok && dot(classes[f].reduced, classes[c].reduced) == 0;
            if (!ok) continue;
            cur.push_back(c);
            rec(c + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return frames;
}

class FormBuilder {
public:
    FormBuilder(const Stencil& st) : st_(st), classes_(direction_classes(st)) {
        frames_ = orthogonal_frames(classes_, st.dim);
        if (frames_.empty()) throw Error(kNotRepresentable);
    }

    const std::vector<std::vector<std::size_t>>& frames() const { return frames_; }

    Matrix frame_matrix(std::size_t f) const {
        const auto n = static_cast<Eigen::Index>(st_.dim);
        Matrix B(n, n);
        for (Eigen::Index d = 0; d < n; ++d) B.col(d) = classes_[frames_[f][static_cast<std::size_t>(d)]].unit;
        return B;
    }

    bool has_rest(std::size_t f) const { return classes_.size() > frames_[f].size(); }

    // Frame coefficients `a` (effective minus eps) plus the eps mixing on the remaining classes.
    std::vector<double> form(std::size_t f, const std::vector<double>& a, double eps) const {
        const auto& frame = frames_[f];
        std::vector<char> in_frame(classes_.size(), 0);
        for (std::size_t c : frame) in_frame[c] = 1;
        const std::size_t rest = classes_.size() - frame.size();

        if (rest > 0 && eps > 0.0) check_isotropic_rest(in_frame, rest);

        std::vector<double> g(st_.size(), 0.0);
        for (std::size_t d = 0; d < frame.size(); ++d) {
            const auto& cls = classes_[frame[d]];
            for (std::size_t m : cls.members) g[m] = a[d] / static_cast<double>(cls.members.size());
        }
        if (rest > 0) {
            const double c = eps * static_cast<double>(st_.dim) / static_cast<double>(rest);
            for (std::size_t k = 0; k < classes_.size(); ++k) {
                if (in_frame[k]) continue;
                for (std::size_t m : classes_[k].members) {
                    g[m] = c / static_cast<double>(classes_[k].members.size());
                }
            }
        }
        return g;
    }

private:
    void check_isotropic_rest(const std::vector<char>& in_frame, std::size_t rest) const {
        const auto n = static_cast<Eigen::Index>(st_.dim);
        Matrix sum = Matrix::Zero(n, n);
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            if (!in_frame[k]) sum += classes_[k].unit * classes_[k].unit.transpose();
        }
        const Matrix target = Matrix::Identity(n, n) * (static_cast<double>(rest) / static_cast<double>(n));
        if ((sum - target).cwiseAbs().maxCoeff() > 1e-12) {
            throw Error("stencil is not symmetric under axis permutations and reflections");
        }
    }

    const Stencil& st_;
    std::vector<DirectionClass> classes_;
    std::vector<std::vector<std::size_t>> frames_;
};

// Linear F = tr(A X) as one stencil-linear form.
std::vector<double> linear_form(const FormBuilder& fb, const Matrix& A) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (std::size_t f = 0; f < fb.frames().size(); ++f) {
        const Matrix B = fb.frame_matrix(f);
        const Matrix D = B.transpose() * A * B;
        Matrix off = D;
        off.diagonal().setZero();
        if (off.cwiseAbs().maxCoeff() > 1e-12 * scale) continue;
        std::vector<double> e(static_cast<std::size_t>(D.rows()));
        for (Eigen::Index d = 0; d < D.rows(); ++d) e[static_cast<std::size_t>(d)] = D(d, d);
        const double eps = fb.has_rest(f) ? 0.5 * *std::min_element(e.begin(), e.end()) : 0.0;
        for (double& v : e) v -= eps;
        return fb.form(f, e, eps);
    }
    throw Error(kNotRepresentable);
}

}  // namespace

// --- Stencil ---------------------------------------------------------------

Stencil Stencil::lattice(std::size_t n, int N) {
    if (n == 0) throw Error("stencil dimension must be positive");
    if (N < 2) throw Error("stencil range N must be at least 2");
    Stencil st;
    st.dim = n;
    st.range = N;
    std::vector<int> y(n, -(N - 1));
    while (true) {
        const int sq = std::inner_product(y.begin(), y.end(), y.begin(), 0);
        if (sq > 0 && sq < N * N && canonical(y)) st.directions.push_back(y);
        std::size_t k = 0;
        while (k < n && ++y[k] > N - 1) y[k++] = -(N - 1);
        if (k == n) break;
    }
    std::sort(st.directions.begin(), st.directions.end(), [](const auto& a, const auto& b) {
        const int sa = std::inner_product(a.begin(), a.end(), a.begin(), 0);
        const int sb = std::inner_product(b.begin(), b.end(), b.begin(), 0);
        if (sa != sb) return sa < sb;
        return a > b;
    });
    return st;
}

Stencil Stencil::axes(std::size_t n) {
    if (n == 0) throw Error("stencil dimension must be positive");
    Stencil st;
    st.dim = n;
    st.range = 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[i] = 1;
        st.directions.push_back(std::move(e));
    }
    return st;
}

double Stencil::norm_squared(std::size_t k) const {
    const auto& y = directions[k];
    return static_cast<double>(std::inner_product(y.begin(), y.end(), y.begin(), 0));
}

void Stencil::validate() const {
    if (dim == 0) throw Error("stencil dimension must be positive");
    if (range < 2) throw Error("stencil range N must be at least 2");
    if (directions.size() < dim) throw Error("stencil needs at least n directions");
    for (const auto& y : directions) {
        if (y.size() != dim) throw Error("stencil direction has the wrong dimension");
        if (!canonical(y)) throw Error("stencil direction must be nonzero with first nonzero entry positive");
        const int sq = std::inner_product(y.begin(), y.end(), y.begin(), 0);
        if (sq >= range * range) throw Error("stencil direction outside |y| < N");
    }
    auto sorted = directions;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error("stencil has duplicate directions");
    }
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<int> e(dim, 0);
        e[i] = 1;
        if (!std::binary_search(sorted.begin(), sorted.end(), e)) throw Error("stencil must contain the coordinate axes");
    }
}

// --- SchemeDescriptor ---------------------------------------------------------

SchemeDescriptor::SchemeDescriptor(Stencil stencil, const Forms& groups, NonlinearityDescriptor source,
                                   std::optional<EllipticityConstants> slope_bounds)
    : stencil_(std::move(stencil)), source_(std::move(source)) {
    stencil_.validate();
    if (stencil_.dim != source_.dim()) throw Error("stencil and nonlinearity dimensions differ");
    if (groups.empty()) throw Error("scheme needs at least one group of forms");
    group_begin_.push_back(0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
        if (g.empty()) throw Error("scheme group without forms");
        for (const auto& f : g) {
            if (f.size() != stencil_.size()) throw Error("form length does not match the stencil");
            for (double c : f) {
                if (!std::isfinite(c)) throw Error("non-finite scheme coefficient");
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            coeffs_.insert(coeffs_.end(), f.begin(), f.end());
        }
        group_begin_.push_back(group_begin_.back() + g.size());
    }
    if (slope_bounds) {
        lambda0_ = slope_bounds->lambda;
        Lambda0_ = slope_bounds->Lambda;
    } else {
        lambda0_ = lo;
        Lambda0_ = hi;
    }
}

std::span<const double> SchemeDescriptor::form(std::size_t f) const {
    return {coeffs_.data() + f * stencil_.size(), stencil_.size()};
}

double SchemeDescriptor::F_h(std::span<const double> r) const {
    const std::size_t m = stencil_.size();
    double outer = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a + 1 < group_begin_.size(); ++a) {
        double inner = -std::numeric_limits<double>::infinity();
        for (std::size_t f = group_begin_[a]; f < group_begin_[a + 1]; ++f) {
            const double* g = coeffs_.data() + f * m;
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += g[k] * r[k];
            inner = std::max(inner, s);
        }
        outer = std::min(outer, inner);
    }
    return outer;
}

std::size_t SchemeDescriptor::active_form(std::span<const double> r) const {
    const std::size_t m = stencil_.size();
    double outer = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t a = 0; a + 1 < group_begin_.size(); ++a) {
        double inner = -std::numeric_limits<double>::infinity();
        std::size_t arg = group_begin_[a];
        for (std::size_t f = group_begin_[a]; f < group_begin_[a + 1]; ++f) {
            const double* g = coeffs_.data() + f * m;
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += g[k] * r[k];
            if (s > inner) {
                inner = s;
                arg = f;
            }
        }
        if (inner < outer) {
            outer = inner;
            best = arg;
        }
    }
    return best;
}

void SchemeDescriptor::second_differences(const StencilValues& v, double h, std::span<double> r) const {
    for (std::size_t k = 0; k < stencil_.size(); ++k) {
        r[k] = (v.plus[k] + v.minus[k] - 2.0 * v.center) / (h * h * stencil_.norm_squared(k));
    }
}

double SchemeDescriptor::residual(const StencilValues& v, double h) const {
    if (v.plus.size() != stencil_.size() || v.minus.size() != stencil_.size()) {
        throw Error("stencil values do not match the stencil");
    }
    std::vector<double> r(stencil_.size());
    second_differences(v, h, r);
    return (v.center - v.previous) / (h * h) - F_h(r);
}

nlohmann::json SchemeDescriptor::coefficient_table() const {
    nlohmann::json groups = nlohmann::json::array();
    for (std::size_t a = 0; a < group_count(); ++a) {
        nlohmann::json forms = nlohmann::json::array();
        for (std::size_t f = group_begin(a); f < group_end(a); ++f) {
            auto g = form(f);
            forms.push_back(std::vector<double>(g.begin(), g.end()));
        }
        groups.push_back(std::move(forms));
    }
    return {{"nonlinearity", source_.name()},
            {"stencil_N", stencil_.range},
            {"directions", stencil_.directions},
            {"lambda0", lambda0_},
            {"Lambda0", Lambda0_},
            {"layout", "min over groups of max over forms"},
            {"groups", std::move(groups)}};
}

// --- construction -------------------------------------------------------------

SchemeDescriptor build_monotone_scheme(const NonlinearityDescriptor& F, const Stencil& stencil) {
    stencil.validate();
    if (stencil.dim != F.dim()) throw Error("stencil and nonlinearity dimensions differ");

    if (F.kind() == NonlinearityKind::custom) {
        const EllipticityReport rep = verify_uniform_ellipticity(F, 200, 1.0);
        if (!rep.pass) throw Error("custom F violates its declared ellipticity constants");
        throw Error(kNotRepresentable);
    }

    FormBuilder fb(stencil);
    SchemeDescriptor::Forms groups;

    switch (F.kind()) {
        case NonlinearityKind::linear:
        case NonlinearityKind::bellman_isaacs:
            for (const auto& g : F.family()) {
                std::vector<std::vector<double>> forms;
                for (const Matrix& A : g) forms.push_back(linear_form(fb, A));
                groups.push_back(std::move(forms));
            }
            break;
        case NonlinearityKind::pucci_plus:
        case NonlinearityKind::pucci_minus: {
            const double lam = F.pucci_lambda(), Lam = F.pucci_Lambda();
            const std::size_t n = stencil.dim;
            std::vector<std::vector<double>> forms;
            for (std::size_t f = 0; f < fb.frames().size(); ++f) {
                const double eps = fb.has_rest(f) ? 0.5 * lam : 0.0;
                for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
                    std::vector<double> a(n);
                    for (std::size_t d = 0; d < n; ++d) a[d] = ((mask >> d) & 1u ? Lam : lam) - eps;
                    forms.push_back(fb.form(f, a, eps));
                }
            }
            if (F.kind() == NonlinearityKind::pucci_plus) {
                groups.push_back(std::move(forms));
            } else {
                for (auto& f : forms) groups.push_back({std::move(f)});
            }
            break;
        }
        case NonlinearityKind::custom: break;
    }
    return SchemeDescriptor(stencil, groups, F);
}

// --- difference quotients --------------------------------------------------------

double delta_tau_minus(const MeshFunction& u, std::size_t node) {
    const MeshSpec& spec = u.spec();
    if (node >= spec.node_count()) throw Error("node outside the mesh");
    if (spec.level_of(node) < 2) throw Error("needs boundary band: no predecessor at t - h^2");
    return (u[node] - u[node - spec.spatial_count()]) / spec.tau();
}

namespace {

std::optional<std::size_t> shifted(const MeshSpec& spec, std::size_t node, std::span<const int> y, int sign) {
    NodeIndex idx = spec.node(node);
    for (std::size_t a = 0; a < idx.i.size(); ++a) idx.i[a] += sign * y[a];
    if (!spec.contains(idx)) return std::nullopt;
    return spec.linear_index(idx);
}

}  // namespace

double delta2_y(const MeshFunction& u, std::size_t node, std::span<const int> y) {
    const MeshSpec& spec = u.spec();
    if (node >= spec.node_count()) throw Error("node outside the mesh");
    if (y.size() != spec.dim()) throw Error("direction has the wrong dimension");
    double sq = 0.0;
    for (int v : y) sq += static_cast<double>(v) * v;
    if (sq == 0.0) throw Error("direction must be nonzero");
    const auto p = shifted(spec, node, y, +1);
    const auto m = shifted(spec, node, y, -1);
    if (!p || !m) throw Error("off-grid neighbor for second difference");
    return (u[*p] + u[*m] - 2.0 * u[node]) / (spec.h() * spec.h() * sq);
}

StencilValues gather(const SchemeDescriptor& S, const MeshFunction& u, std::size_t node) {
    const MeshSpec& spec = u.spec();
    if (S.stencil().dim != spec.dim()) throw Error("scheme and mesh dimensions differ");
    if (spec.level_of(node) < 2) throw Error("needs boundary band: no predecessor at t - h^2");
    StencilValues v;
    v.center = u[node];
    v.previous = u[node - spec.spatial_count()];
    for (const auto& y : S.stencil().directions) {
        const auto p = shifted(spec, node, y, +1);
        const auto m = shifted(spec, node, y, -1);
        if (!p || !m) throw Error("off-grid neighbor for second difference");
        v.plus.push_back(u[*p]);
        v.minus.push_back(u[*m]);
    }
    return v;
}

double apply_scheme(const SchemeDescriptor& S, const MeshFunction& u, std::size_t node) {
    const MeshSpec& spec = u.spec();
    if (S.stencil().range > spec.stencil_range()) throw Error("scheme stencil is wider than the mesh's N");
    if (node >= spec.node_count() || !spec.is_interior(node)) throw Error("node is not interior");
    return S.residual(gather(S, u, node), spec.h());
}

// --- checks ---------------------------------------------------------------------

MonotonicityReport check_monotonicity(const SchemeDescriptor& S, int trials, std::uint64_t seed,
                                      double tolerance) {
    if (trials < 1) throw Error("trials must be at least 1");
    const std::size_t m = S.stencil().size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    const double scales[] = {1.0, 10.0, 100.0};

    MonotonicityReport rep;
    rep.trials = trials;
    rep.min_slope = std::numeric_limits<double>::infinity();
    rep.max_slope = -std::numeric_limits<double>::infinity();
    rep.positive_bounds = S.lambda0() > 0.0;

    std::vector<double> r(m), rp(m), rm(m);
    for (int t = 0; t < trials; ++t) {
        const double scale = scales[t % 3];
        for (double& v : r) v = scale * unif(rng);
        for (std::size_t i = 0; i < m; ++i) {
            const double step = 1e-6 * std::max(1.0, std::abs(r[i]));
            rp = r;
            rm = r;
            rp[i] += step;
            rm[i] -= step;
            const double slope = (S.F_h(rp) - S.F_h(rm)) / (2.0 * step);
            rep.min_slope = std::min(rep.min_slope, slope);
            rep.max_slope = std::max(rep.max_slope, slope);
            if (slope < S.lambda0() - tolerance || slope > S.Lambda0() + tolerance) ++rep.slope_violations;
        }

        // Ordered local pair touching at the center.
        const double h = 0.1;
        StencilValues u, v;
        u.center = v.center = scale * unif(rng);
        u.previous = scale * unif(rng);
        v.previous = u.previous + scale * pos(rng);
        for (std::size_t k = 0; k < m; ++k) {
            u.plus.push_back(scale * unif(rng));
            u.minus.push_back(scale * unif(rng));
            v.plus.push_back(u.plus[k] + scale * pos(rng));
            v.minus.push_back(u.minus[k] + scale * pos(rng));
        }
        const double su = S.residual(u, h), sv = S.residual(v, h);
        if (su < sv - 1e-9 * (1.0 + std::abs(su) + std::abs(sv))) ++rep.pair_violations;
    }
    rep.pass = rep.positive_bounds && rep.slope_violations == 0 && rep.pair_violations == 0;
    return rep;
}

ConsistencyReport consistency_error(const SchemeDescriptor& S, const SmoothTestFunction& phi,
                                    const MeshSpec& spec, int levels) {
    if (levels < 1) throw Error("levels must be at least 1");
    ConsistencyReport rep;
    const NonlinearityDescriptor& F = S.source();
    for (int l = 0; l < levels; ++l) {
        const double h = spec.h() / static_cast<double>(1 << l);
        const MeshSpec s(h, spec.domain(), spec.requested_horizon(), spec.stencil_range());
        const MeshFunction u = MeshFunction::sample(s, phi.value);
        double err = 0.0;
        for (std::size_t k = 0; k < s.node_count(); ++k) {
            if (!s.is_interior(k)) continue;
            const ParabolicPoint p = s.point(k);
            const double exact = phi.time_derivative(p) - F(phi.hessian(p));
            err = std::max(err, std::abs(exact - apply_scheme(S, u, k)));
        }
        rep.h.push_back(h);
        rep.sup_error.push_back(err);
        const double d1 = h + h * phi.d3_bound + h * h * phi.tt_bound;
        const double d2 = h * h * (1.0 + phi.d4_bound + phi.tt_bound);
        rep.K_first_order = std::max(rep.K_first_order, err / d1);
        rep.K_second_order = std::max(rep.K_second_order, err / d2);
        // Below the rounding floor an exact scheme has nothing left to decrease.
        if (l > 0 && !(err < rep.sup_error[l - 1]) && rep.sup_error[l - 1] > 1e-12) rep.decreasing = false;
    }
    return rep;
}

}  // namespace parastep
