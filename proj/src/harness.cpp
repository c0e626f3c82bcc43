#include "parastep/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "parastep/error.hpp"
#include "parastep/mesh_io.hpp"

namespace parastep {

namespace {

constexpr double pi = std::numbers::pi;

std::size_t check_dim(const std::string& id, std::size_t n, std::size_t fixed) {
    if (n != 0 && n != fixed) {
        throw Error("exact solution '" + id + "' is " + std::to_string(fixed) + "-dimensional");
    }
    return fixed;
}

// e^{-c t} sin(pi x) in 1D.
ExactSolution decaying_sine(const std::string& id, double c) {
    ExactSolution u;
    u.id = id;
    u.dim = 1;
    u.value = [c](const ParabolicPoint& p) { return std::exp(-c * p.t) * std::sin(pi * p.x[0]); };
    u.time_derivative = [c](const ParabolicPoint& p) { return -c * std::exp(-c * p.t) * std::sin(pi * p.x[0]); };
    u.hessian = [c](const ParabolicPoint& p) {
        Matrix H(1, 1);
        H(0, 0) = -pi * pi * std::exp(-c * p.t) * std::sin(pi * p.x[0]);
        return H;
    };
    return u;
}

}  // namespace

const std::vector<std::string>& exact_solution_ids() {
    static const std::vector<std::string> ids = {"heat_sine", "pucci_plus_concave", "pucci_minus_concave",
                                                 "heat_2d_product", "zero"};
    return ids;
}

ExactSolution exact_solution(const std::string& id, std::size_t n, double lambda, double Lambda) {
    if (id == "heat_sine") {
        check_dim(id, n, 1);
        return decaying_sine(id, pi * pi);
    }
    if (id == "pucci_plus_concave") {
        check_dim(id, n, 1);
        return decaying_sine(id, lambda * pi * pi);
    }
    if (id == "pucci_minus_concave") {
        check_dim(id, n, 1);
        return decaying_sine(id, Lambda * pi * pi);
    }
    if (id == "heat_2d_product") {
        check_dim(id, n, 2);
        ExactSolution u;
        u.id = id;
        u.dim = 2;
        u.value = [](const ParabolicPoint& p) {
            return std::exp(-2 * pi * pi * p.t) * std::sin(pi * p.x[0]) * std::sin(pi * p.x[1]);
        };
        u.time_derivative = [](const ParabolicPoint& p) {
            return -2 * pi * pi * std::exp(-2 * pi * pi * p.t) * std::sin(pi * p.x[0]) * std::sin(pi * p.x[1]);
        };
        u.hessian = [](const ParabolicPoint& p) {
            const double e = pi * pi * std::exp(-2 * pi * pi * p.t);
            const double s0 = std::sin(pi * p.x[0]), s1 = std::sin(pi * p.x[1]);
            Matrix H(2, 2);
            H(0, 0) = H(1, 1) = -e * s0 * s1;
            H(0, 1) = H(1, 0) = e * std::cos(pi * p.x[0]) * std::cos(pi * p.x[1]);
            return H;
        };
        return u;
    }
    if (id == "zero") {
        ExactSolution u;
        u.id = id;
        u.dim = n == 0 ? 1 : n;
        const auto k = static_cast<Eigen::Index>(u.dim);
        u.value = [](const ParabolicPoint&) { return 0.0; };
        u.time_derivative = [](const ParabolicPoint&) { return 0.0; };
        u.hessian = [k](const ParabolicPoint&) { return Matrix(Matrix::Zero(k, k)); };
        return u;
    }
    throw Error("unknown exact solution '" + id + "'");
}

double exact_solution(const std::string& id, const ParabolicPoint& p, double lambda, double Lambda) {
    return exact_solution(id, p.dim(), lambda, Lambda).value(p);
}

NonlinearityDescriptor exact_solution_operator(const std::string& id, std::size_t n, double lambda,
                                               double Lambda) {
    const ExactSolution u = exact_solution(id, n, lambda, Lambda);
    if (id == "pucci_plus_concave") return NonlinearityDescriptor::pucci_plus(1, lambda, Lambda);
    if (id == "pucci_minus_concave") return NonlinearityDescriptor::pucci_minus(1, lambda, Lambda);
    return NonlinearityDescriptor::heat(u.dim);
}

double residual_self_check(const ExactSolution& u, const NonlinearityDescriptor& F, int samples,
                           std::uint64_t seed) {
    if (F.dim() != u.dim) throw Error("operator and exact solution dimensions differ");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        ParabolicPoint p;
        for (std::size_t i = 0; i < u.dim; ++i) p.x.push_back(unif(rng));
        p.t = unif(rng);
        worst = std::max(worst, std::abs(u.time_derivative(p) - F(u.hessian(p))));
    }
    return worst;
}

// --- convergence ---------------------------------------------------------------------

std::optional<double> fit_rate(std::span<const double> h, std::span<const double> errors) {
    if (h.size() != errors.size()) throw Error("fit_rate: h and error lists differ in length");
    if (h.size() < 3) return std::nullopt;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(errors[i] > 0.0) || !(h[i] > 0.0)) return std::nullopt;
        x.push_back(std::log(h[i]));
        y.push_back(std::log(errors[i]));
    }
    const double m = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    return sxy / sxx;
}

std::vector<double> pairwise_rates(std::span<const double> h, std::span<const double> errors) {
    std::vector<double> r(h.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (errors[k] > 0.0 && errors[k - 1] > 0.0) {
            r[k] = std::log(errors[k - 1] / errors[k]) / std::log(h[k - 1] / h[k]);
        }
    }
    return r;
}

SchemeDescriptor make_scheme(const ProblemConfig& cfg) {
    const Stencil st = cfg.scheme == "axes" ? Stencil::axes(cfg.dim()) : Stencil::lattice(cfg.dim(), cfg.stencil_N);
    return build_monotone_scheme(cfg.make_nonlinearity(), st);
}

MeshSpec make_mesh(const ProblemConfig& cfg, double h) { return MeshSpec(h, cfg.domain(), cfg.T, cfg.stencil_N); }

Problem make_problem(const ProblemConfig& cfg, double h) {
    MeshSpec spec = make_mesh(cfg, h);
    SchemeDescriptor S = make_scheme(cfg);
    if (!cfg.boundary_file.empty()) {
        std::ifstream in(cfg.boundary_file);
        if (!in) throw Error("cannot open boundary file '" + cfg.boundary_file + "'");
        const MeshFunction table = read_mesh_function(in);
        if (!(table.spec() == spec)) throw Error("boundary file mesh does not match h = " + std::to_string(h));
        return {spec, S, BoundaryData::from_table(table)};
    }
    const ExactSolution u = exact_solution(cfg.exact, cfg.dim(), cfg.lambda, cfg.Lambda);
    return {spec, S, BoundaryData::from_function(spec, u.value)};
}

ConvergenceReport run_convergence_study(const ProblemConfig& cfg, std::uint64_t seed, int threads) {
    cfg.validate();
    if (cfg.exact.empty()) throw Error("a convergence study needs an exact-solution boundary source");
    const ExactSolution exact = exact_solution(cfg.exact, cfg.dim(), cfg.lambda, cfg.Lambda);
    const std::size_t count = cfg.h_list.size();

    struct Slot {
        ConvergenceRow row;
        double tolerance = 0.0;
        std::string error;
    };
    std::vector<Slot> slots(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            Slot& s = slots[k];
            s.row.h = cfg.h_list[k];
            try {
                const Problem p = make_problem(cfg, cfg.h_list[k]);
                const auto start = std::chrono::steady_clock::now();
                const auto [u, rep] = solve(p.scheme, p.spec, p.boundary, cfg.solver);
                s.row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                double err = 0.0;
                for (std::size_t j = 0; j < p.spec.node_count(); ++j) {
                    err = std::max(err, std::abs(u[j] - exact.value(p.spec.point(j))));
                }
                s.row.sup_error = err;
                s.row.iterations = rep.total_iterations();
                s.row.max_residual = rep.max_residual;
                s.row.converged = rep.converged;
                s.tolerance = rep.tolerance;
            } catch (const std::exception& e) {
                s.error = "h = " + std::to_string(cfg.h_list[k]) + ": " + e.what();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ConvergenceReport rep;
    rep.solution = cfg.exact;
    rep.seed = seed;
    double tol = 0.0;
    for (const Slot& s : slots) {
        if (!s.error.empty()) {
            rep.failure = s.error;
            break;
        }
        rep.rows.push_back(s.row);
        tol = std::max(tol, s.tolerance);
    }
    std::vector<double> hs, es;
    for (const auto& r : rep.rows) {
        hs.push_back(r.h);
        es.push_back(r.sup_error);
    }
    const auto pr = pairwise_rates(hs, es);
    for (std::size_t k = 0; k < rep.rows.size(); ++k) rep.rows[k].rate_pairwise = pr[k];
    for (std::size_t k = 1; k < es.size(); ++k) {
        if (es[k] > es[k - 1] && es[k - 1] > 10.0 * tol) rep.monotone_refinement = false;
    }
    double emax = 0.0;
    for (double e : es) emax = std::max(emax, e);
    if (rep.rows.size() < 3) {
        rep.fit_note = "fewer than 3 resolutions";
    } else if (emax <= 10.0 * tol) {
        rep.fit_note = "errors at solver tolerance";
    } else {
        rep.fitted_rate = fit_rate(hs, es);
        if (!rep.fitted_rate) rep.fit_note = "fit undefined";
    }
    return rep;
}

namespace {

std::string fmt(const char* f, double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_convergence_csv(std::ostream& out, const ConvergenceReport& r) {
    out << "# parastep converge seed=" << r.seed << " solution=" << r.solution;
    if (r.fitted_rate) out << " rate=" << fmt("%.6f", *r.fitted_rate);
    if (!r.complete()) out << " incomplete";
    out << "\n";
    out << "h,sup_error,rate_pairwise,iterations\n";
    for (const auto& row : r.rows) {
        out << fmt("%.10g", row.h) << ',' << fmt("%.12e", row.sup_error) << ',' << fmt("%.6f", row.rate_pairwise)
            << ',' << row.iterations << '\n';
    }
}

nlohmann::json to_json(const ConvergenceReport& r) {
    nlohmann::json j;
    j["solution"] = r.solution;
    j["seed"] = r.seed;
    j["fitted_rate"] = r.fitted_rate ? nlohmann::json(*r.fitted_rate) : nlohmann::json(nullptr);
    j["fit_note"] = r.fit_note;
    j["monotone_refinement"] = r.monotone_refinement;
    j["complete"] = r.complete();
    j["failure"] = r.failure;
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"h", row.h},
                             {"sup_error", row.sup_error},
                             {"rate_pairwise", number_or_null(row.rate_pairwise)},
                             {"iterations", row.iterations},
                             {"max_residual", row.max_residual},
                             {"wall_seconds", row.wall_seconds},
                             {"converged", row.converged}});
    }
    return j;
}

// --- diagnostics ----------------------------------------------------------------------

std::size_t DiagnosticsBundle::falsifier_violations() const {
    return (super_side ? super_side->violations.size() : 0) + (sub_side ? sub_side->violations.size() : 0);
}

std::size_t DiagnosticsBundle::property_violations() const {
    return falsifier_violations() + replay_failures + (convolution && !convolution->pass ? 1 : 0) +
           (good_set && !good_set_nonincreasing ? 1 : 0);
}

namespace {

SmoothTestFunction cosine_test_function(std::size_t n) {
    SmoothTestFunction f;
    const auto k = static_cast<Eigen::Index>(n);
    auto prod = [n](const ParabolicPoint& p) {
        double v = std::exp(-p.t);
        for (std::size_t i = 0; i < n; ++i) v *= std::cos(p.x[i]);
        return v;
    };
    f.value = prod;
    f.time_derivative = [prod](const ParabolicPoint& p) { return -prod(p); };
    f.hessian = [n, k](const ParabolicPoint& p) {
        Matrix H(k, k);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double v = std::exp(-p.t);
                for (std::size_t q = 0; q < n; ++q) {
                    const double c = std::cos(p.x[q]), s = std::sin(p.x[q]);
                    if (q == i && q == j) v *= -c;
                    else if (q == i || q == j) v *= -s;
                    else v *= c;
                }
                H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            }
        }
        return H;
    };
    const double dn = static_cast<double>(n);
    f.d3_bound = std::pow(dn, 1.5);
    f.d4_bound = dn * dn;
    f.tt_bound = 1.0;
    return f;
}

}  // namespace

DiagnosticsBundle run_diagnostics(const ProblemConfig& cfg, const MeshFunction& u, std::uint64_t seed) {
    const DiagnosticsToggles& t = cfg.diagnostics;
    const MeshSpec& spec = u.spec();
    const std::size_t n = spec.dim();
    DiagnosticsBundle d;
    d.seed = seed;
    d.h = spec.h();
    if (!t.any()) return d;
    const NonlinearityDescriptor F = cfg.make_nonlinearity();
    if (F.dim() != n) throw Error("configured operator and mesh dimensions differ");

    if (t.falsifier) {
        const Stencil st = cfg.scheme == "axes" ? Stencil::axes(n) : Stencil::lattice(n, spec.stencil_range());
        const SchemeDescriptor S = build_monotone_scheme(F, st);
        d.K = consistency_error(S, cosine_test_function(n), spec, 1).K_first_order;
        d.delta = t.delta_multiple * spec.stencil_range() * spec.h();
        d.violation_tolerance = std::max(1e-9, t.tolerance_factor * d.K * spec.h());
        FalsifierConfig fc;
        fc.delta = d.delta;
        fc.samples_per_node = t.falsifier_samples;
        fc.violation_tolerance = d.violation_tolerance;
        fc.seed = seed;
        fc.side = Side::super;
        d.super_side = delta_falsifier(u, F, fc);
        fc.seed = seed + 1;
        fc.side = Side::sub;
        d.sub_side = delta_falsifier(u, F, fc);
        for (const FalsifierReport* r : {&*d.super_side, &*d.sub_side}) {
            for (const auto& c : r->violations) {
                if (!replay_certificate(u, F, c, d.delta, r->touch_tolerance, r->violation_tolerance).violates) {
                    ++d.replay_failures;
                }
            }
        }
    }

    if (t.convolution) d.convolution = verify_convolution_properties(u, t.theta, 1.0);

    if (t.good_set) {
        const Box& dom = spec.domain();
        ParabolicPoint c;
        for (std::size_t i = 0; i < n; ++i) {
            const int mid = spec.cells(i) / 2;
            c.x.push_back(spec.coordinate(i, mid));
        }
        int level = std::max(1, t.good_set_level);
        if (level >= spec.time_levels()) level = std::max(1, spec.time_levels() / 10);
        c.t = spec.time(level);
        double r = std::min(t.good_set_r, 0.95 * dom.distance_to_boundary(c.x));
        r = std::min(r, 0.999 * std::sqrt(std::max(0.0, spec.horizon() - c.t)));
        d.good_set_center = c;
        d.good_set_r = r;
        if (r <= 0.0) {
            d.notes.push_back("good set skipped: no room for the region");
        } else {
            try {
                d.good_set = good_set_measure(u, t.M, KBox{c, r}, Cylinder{c, r, Orientation::forward});
                for (std::size_t k = 1; k < d.good_set->bad_fraction.size(); ++k) {
                    if (d.good_set->M[k] >= d.good_set->M[k - 1] &&
                        d.good_set->bad_fraction[k] > d.good_set->bad_fraction[k - 1]) {
                        d.good_set_nonincreasing = false;
                    }
                }
            } catch (const Error& e) {
                d.notes.push_back(std::string("good set skipped: ") + e.what());
            }
        }
    }

    if (t.abp) {
        double low = 0.0;
        for (std::size_t k = 0; k < spec.node_count(); ++k) {
            const NodeIndex idx = spec.node(k);
            bool face = idx.j == 1;
            for (std::size_t i = 0; i < n && !face; ++i) face = idx.i[i] == 0 || idx.i[i] == spec.cells(i);
            if (face) low = std::min(low, u[k]);
        }
        d.abp_shift = low < 0.0 ? -low : 0.0;
        std::vector<double> w(u.values().begin(), u.values().end());
        for (double& x : w) x += d.abp_shift;
        d.abp = abp_diagnostic(MeshFunction(spec, std::move(w)));
    }
    return d;
}

namespace {

nlohmann::json to_json(const Paraboloid& P) {
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    std::vector<std::vector<double>> Q;
    for (Eigen::Index i = 0; i < P.Q.rows(); ++i) Q.push_back(vec(P.Q.row(i).transpose()));
    return {{"c", P.c}, {"l", vec(P.l)}, {"m", P.m}, {"a", vec(P.a)}, {"Q", Q}};
}

nlohmann::json to_json(const FalsifierReport& r) {
    nlohmann::json j{{"side", to_string(r.side)},
                     {"delta", r.delta},
                     {"touch_tolerance", r.touch_tolerance},
                     {"violation_tolerance", r.violation_tolerance},
                     {"nodes_tested", r.nodes_tested},
                     {"candidates", r.candidates},
                     {"touching", r.touching},
                     {"extreme_margin", number_or_null(r.extreme_margin)},
                     {"violations", nlohmann::json::array()}};
    for (const auto& c : r.violations) {
        j["violations"].push_back({{"node", c.node},
                                   {"x", c.point.x},
                                   {"t", c.point.t},
                                   {"margin", c.margin},
                                   {"paraboloid", to_json(c.P)}});
    }
    return j;
}

}  // namespace

nlohmann::json to_json(const DiagnosticsBundle& d) {
    nlohmann::json j{{"seed", d.seed}, {"h", d.h}, {"notes", d.notes}};
    if (d.super_side) {
        j["falsifier"] = {{"delta", d.delta},
                          {"K", d.K},
                          {"violation_tolerance", d.violation_tolerance},
                          {"replay_failures", d.replay_failures},
                          {"super", to_json(*d.super_side)},
                          {"sub", to_json(*d.sub_side)}};
    }
    if (d.convolution) {
        const auto& c = *d.convolution;
        j["convolution"] = {{"theta", c.report.theta},
                            {"omega", c.report.omega},
                            {"holder_norm", c.report.holder_norm},
                            {"region", c.report.region},
                            {"max_shift", c.report.max_shift},
                            {"order_violations", c.order_violations},
                            {"lower_bound_violations", c.lower_bound_violations},
                            {"semiconcavity_violations", c.semiconcavity_violations},
                            {"triples_tested", c.triples_tested},
                            {"max_second_difference", c.max_second_difference},
                            {"shift_bound_excess", number_or_null(c.shift_bound_excess)},
                            {"time_seminorm", c.time_seminorm},
                            {"time_bound", c.time_bound},
                            {"pass", c.pass}};
    }
    if (d.good_set) {
        const auto& g = *d.good_set;
        j["good_set"] = {{"center_x", d.good_set_center.x},
                         {"center_t", d.good_set_center.t},
                         {"r", d.good_set_r},
                         {"box_nodes", g.box_nodes},
                         {"M", g.M},
                         {"bad_fraction", g.bad_fraction},
                         {"bad_measure", g.bad_measure},
                         {"nonincreasing", d.good_set_nonincreasing},
                         {"fitted", g.fitted},
                         {"slope", number_or_null(g.slope)},
                         {"slope_ci", {number_or_null(g.slope_ci_low), number_or_null(g.slope_ci_high)}}};
    }
    if (d.abp) {
        const auto& a = *d.abp;
        j["abp"] = {{"shift", d.abp_shift},
                    {"rho", a.rho},
                    {"K", a.K},
                    {"sup_negative_part", a.lhs},
                    {"contact_nodes", a.contact_nodes},
                    {"contact_measure", a.contact_measure},
                    {"ratio", a.ratio}};
    }
    return j;
}

void write_diagnostics_text(std::ostream& out, const DiagnosticsBundle& d) {
    out << "# parastep diagnose seed=" << d.seed << " h=" << fmt("%.10g", d.h) << "\n";
    if (d.empty()) {
        out << "empty\n";
        return;
    }
    if (d.super_side) {
        out << "[falsifier]\n";
        out << "delta " << fmt("%.10g", d.delta) << "\nK " << fmt("%.6e", d.K) << "\nviolation_tolerance "
            << fmt("%.6e", d.violation_tolerance) << "\n";
        for (const FalsifierReport* r : {&*d.super_side, &*d.sub_side}) {
            out << to_string(r->side) << " nodes=" << r->nodes_tested << " candidates=" << r->candidates
                << " touching=" << r->touching << " extreme_margin=" << fmt("%.6e", r->extreme_margin)
                << " violations=" << r->violations.size() << "\n";
        }
        out << "replay_failures " << d.replay_failures << "\n";
        out << "# certificate side node t x.. c l.. m Q(row-major).. margin\n";
        for (const FalsifierReport* r : {&*d.super_side, &*d.sub_side}) {
            for (const auto& c : r->violations) {
                out << "certificate " << to_string(c.side) << ' ' << c.node << ' ' << fmt("%.17g", c.point.t);
                for (double x : c.point.x) out << ' ' << fmt("%.17g", x);
                out << ' ' << fmt("%.17g", c.P.c);
                for (Eigen::Index i = 0; i < c.P.l.size(); ++i) out << ' ' << fmt("%.17g", c.P.l[i]);
                out << ' ' << fmt("%.17g", c.P.m);
                for (Eigen::Index i = 0; i < c.P.Q.size(); ++i) out << ' ' << fmt("%.17g", c.P.Q.data()[i]);
                out << ' ' << fmt("%.6e", c.margin) << "\n";
            }
        }
    }
    if (d.convolution) {
        const auto& c = *d.convolution;
        out << "[convolution]\ntheta " << fmt("%.6g", c.report.theta) << "\nomega " << fmt("%.6e", c.report.omega)
            << "\norder_violations " << c.order_violations << "\nlower_bound_violations "
            << c.lower_bound_violations << "\nsemiconcavity_violations " << c.semiconcavity_violations
            << "\ntriples_tested " << c.triples_tested << "\nmax_shift " << fmt("%.6e", c.report.max_shift)
            << "\ntime_seminorm " << fmt("%.6e", c.time_seminorm) << " bound " << fmt("%.6e", c.time_bound)
            << "\npass " << (c.pass ? "yes" : "no") << "\n";
    }
    if (d.good_set) {
        const auto& g = *d.good_set;
        out << "[good_set]\nr " << fmt("%.6g", d.good_set_r) << "\nt " << fmt("%.10g", d.good_set_center.t)
            << "\nbox_nodes " << g.box_nodes << "\n# M bad_fraction bad_measure\n";
        for (std::size_t k = 0; k < g.M.size(); ++k) {
            out << fmt("%.6g", g.M[k]) << ' ' << fmt("%.6f", g.bad_fraction[k]) << ' '
                << fmt("%.6e", g.bad_measure[k]) << "\n";
        }
        out << "nonincreasing " << (d.good_set_nonincreasing ? "yes" : "no") << "\n";
        if (g.fitted) {
            out << "slope " << fmt("%.6f", g.slope) << " ci " << fmt("%.6f", g.slope_ci_low) << ' '
                << fmt("%.6f", g.slope_ci_high) << "\n";
        } else {
            out << "slope none\n";
        }
    }
    if (d.abp) {
        const auto& a = *d.abp;
        out << "[abp]\nshift " << fmt("%.6e", d.abp_shift) << "\nrho " << fmt("%.6g", a.rho) << "\nK "
            << fmt("%.6e", a.K) << "\nsup_negative_part " << fmt("%.6e", a.lhs) << "\ncontact_nodes "
            << a.contact_nodes << "\nratio " << fmt("%.6e", a.ratio) << "\n";
    }
    for (const auto& note : d.notes) out << "note " << note << "\n";
}

}  // namespace parastep
