#include "parastep/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "parastep/config.hpp"
#include "parastep/error.hpp"
#include "parastep/harness.hpp"
#include "parastep/mesh_io.hpp"

namespace parastep {

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    bool strict = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string h_list;
    std::string scheme;
    std::optional<int> stencil_N;
    std::string input;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "problem config file (key = value)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--strict", o.strict, "exit 2 when a checked property fails");
    sub->add_option("--seed", o.seed, "random seed (default fixed per subcommand)");
    sub->add_option("--threads", o.threads, "worker threads (fallback PARASTEP_THREADS)");
    sub->add_option("--h-list", o.h_list, "mesh sizes, e.g. \"1/8,1/16,1/32\"");
    sub->add_option("--scheme", o.scheme, "stencil family: lattice or axes");
    sub->add_option("--stencil-N", o.stencil_N, "stencil range N");
}

ProblemConfig load(const Options& o) {
    ProblemConfig cfg = o.config.empty() ? ProblemConfig{} : load_problem_config(o.config);
    if (!o.h_list.empty()) {
        std::string s = o.h_list;
        if (s.find('[') == std::string::npos) s = "[" + s + "]";
        cfg.h_list = parse_list(s);
    }
    if (!o.scheme.empty()) cfg.scheme = o.scheme;
    if (o.stencil_N) cfg.stencil_N = *o.stencil_N;
    cfg.validate();
    return cfg;
}

int thread_count(const Options& o) {
    if (o.threads) return std::max(1, *o.threads);
    if (const char* env = std::getenv("PARASTEP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        throw Error("PARASTEP_THREADS must be a positive integer");
    }
    return 1;
}

std::uint64_t seed_for(const Options& o, const ProblemConfig& cfg, std::uint64_t fallback) {
    if (o.seed) return *o.seed;
    if (cfg.seed) return *cfg.seed;
    return fallback;
}

std::filesystem::path out_dir(const Options& o) {
    std::filesystem::path p(o.out);
    std::filesystem::create_directories(p);
    return p;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    return f;
}

// Solve at the finest h of the list.
std::pair<MeshFunction, SolveReport> solve_finest(const ProblemConfig& cfg) {
    const Problem p = make_problem(cfg, cfg.h_list.back());
    return solve(p.scheme, p.spec, p.boundary, cfg.solver);
}

double error_vs_exact(const ProblemConfig& cfg, const MeshFunction& u) {
    const ExactSolution ex = exact_solution(cfg.exact, cfg.dim(), cfg.lambda, cfg.Lambda);
    double e = 0.0;
    for (std::size_t k = 0; k < u.spec().node_count(); ++k) {
        e = std::max(e, std::abs(u[k] - ex.value(u.spec().point(k))));
    }
    return e;
}

int run_solve(const Options& o, std::ostream& out) {
    const ProblemConfig cfg = load(o);
    const std::uint64_t seed = seed_for(o, cfg, 101);
    const auto dir = out_dir(o);
    const auto [u, rep] = solve_finest(cfg);
    {
        auto f = open_out(dir / "solution.txt");
        write_mesh_function(f, u);
    }
    nlohmann::json j{{"command", "solve"},
                     {"seed", seed},
                     {"h", u.spec().h()},
                     {"nodes", u.spec().node_count()},
                     {"method", to_string(rep.method)},
                     {"converged", rep.converged},
                     {"max_residual", rep.max_residual},
                     {"tolerance", rep.tolerance},
                     {"total_iterations", rep.total_iterations()},
                     {"wall_seconds", rep.wall_seconds}};
    if (!cfg.exact.empty()) j["sup_error"] = error_vs_exact(cfg, u);
    open_out(dir / "summary.json") << j.dump(2) << "\n";
    out << "# parastep solve seed=" << seed << "\n"
        << "h=" << u.spec().h() << " iterations=" << rep.total_iterations() << " converged=" << rep.converged;
    if (j.contains("sup_error")) out << " sup_error=" << j["sup_error"].get<double>();
    out << "\n";
    return o.strict && !rep.converged ? 2 : 0;
}

int run_converge(const Options& o, std::ostream& out, std::ostream& err) {
    const ProblemConfig cfg = load(o);
    const std::uint64_t seed = seed_for(o, cfg, 202);
    const auto dir = out_dir(o);
    const ConvergenceReport r = run_convergence_study(cfg, seed, thread_count(o));
    {
        auto f = open_out(dir / "convergence.csv");
        write_convergence_csv(f, r);
    }
    open_out(dir / "summary.json") << to_json(r).dump(2) << "\n";
    write_convergence_csv(out, r);
    if (!r.complete()) {
        err << "error: " << r.failure << "\n";
        return 1;
    }
    if (!r.monotone_refinement) err << "warning: error increased under refinement\n";
    return o.strict && !r.monotone_refinement ? 2 : 0;
}

int run_diagnose(const Options& o, std::ostream& out) {
    const ProblemConfig cfg = load(o);
    const std::uint64_t seed = seed_for(o, cfg, 303);
    const auto dir = out_dir(o);
    std::optional<MeshFunction> u;
    if (!o.input.empty()) {
        std::ifstream in(o.input);
        if (!in) throw Error("cannot open input grid '" + o.input + "'");
        u = read_mesh_function(in);
    } else {
        u = solve_finest(cfg).first;
    }
    const DiagnosticsBundle d = run_diagnostics(cfg, *u, seed);
    {
        auto f = open_out(dir / "diagnostics.txt");
        write_diagnostics_text(f, d);
    }
    open_out(dir / "diagnostics.json") << to_json(d).dump(2) << "\n";
    write_diagnostics_text(out, d);
    return o.strict && d.property_violations() > 0 ? 2 : 0;
}

int run_certify(const Options& o, std::ostream& out) {
    const ProblemConfig cfg = load(o);
    const std::uint64_t seed = seed_for(o, cfg, 404);
    const auto dir = out_dir(o);
    const SchemeDescriptor S = make_scheme(cfg);
    const MonotonicityReport mono = check_monotonicity(S, 10000, seed);

    // Consistency on a quadratic whose Hessian is diagonal (exact for every built-in scheme).
    const std::size_t n = cfg.dim();
    const auto ni = static_cast<Eigen::Index>(n);
    SmoothTestFunction quad;
    quad.value = [n](const ParabolicPoint& p) {
        double v = 0.3 - 0.7 * p.t;
        for (std::size_t i = 0; i < n; ++i) v += 0.5 * p.x[i] + (1.0 + static_cast<double>(i)) * p.x[i] * p.x[i];
        return v;
    };
    quad.time_derivative = [](const ParabolicPoint&) { return -0.7; };
    quad.hessian = [ni](const ParabolicPoint&) {
        Matrix H = Matrix::Zero(ni, ni);
        for (Eigen::Index i = 0; i < ni; ++i) H(i, i) = 2.0 * (1.0 + static_cast<double>(i));
        return H;
    };
    const MeshSpec spec = make_mesh(cfg, cfg.h_list.front());
    const ConsistencyReport exact = consistency_error(S, quad, spec, 1);

    nlohmann::json j{{"command", "certify"},
                     {"seed", seed},
                     {"lambda0", S.lambda0()},
                     {"Lambda0", S.Lambda0()},
                     {"monotonicity",
                      {{"trials", mono.trials},
                       {"min_slope", mono.min_slope},
                       {"max_slope", mono.max_slope},
                       {"slope_violations", mono.slope_violations},
                       {"pair_violations", mono.pair_violations},
                       {"pass", mono.pass}}},
                     {"quadratic_consistency_error", exact.sup_error.front()}};
    bool ok = mono.pass && exact.sup_error.front() <= 1e-12 * (1.0 + 1.0 / (spec.h() * spec.h()));
    if (!cfg.exact.empty()) {
        const ExactSolution ex = exact_solution(cfg.exact, n, cfg.lambda, cfg.Lambda);
        const double res = residual_self_check(ex, cfg.make_nonlinearity(), 1000, seed);
        j["exact_solution_residual"] = res;
        ok = ok && res <= 1e-10;
    }
    j["pass"] = ok;
    open_out(dir / "certify.json") << j.dump(2) << "\n";
    out << "# parastep certify seed=" << seed << "\n"
        << "monotonicity " << (mono.pass ? "pass" : "FAIL") << " slopes [" << mono.min_slope << ", "
        << mono.max_slope << "] bounds [" << S.lambda0() << ", " << S.Lambda0() << "]\n"
        << "quadratic consistency error " << exact.sup_error.front() << "\n";
    if (j.contains("exact_solution_residual")) {
        out << "exact solution residual " << j["exact_solution_residual"].get<double>() << "\n";
    }
    out << (ok ? "pass" : "FAIL") << "\n";
    return o.strict && !ok ? 2 : 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"parastep: monotone schemes and diagnostics for u_t = F(D^2 u)", "parastep"};
    app.require_subcommand(1);
    Options o;
    auto* solve_cmd = app.add_subcommand("solve", "solve at the finest h, write solution.txt and summary.json");
    auto* converge_cmd = app.add_subcommand("converge", "dyadic convergence study, write convergence.csv");
    auto* diagnose_cmd = app.add_subcommand("diagnose", "falsifier, convolution, good-set and ABP reports");
    auto* certify_cmd = app.add_subcommand("certify", "monotonicity and consistency checks of the scheme");
    for (auto* s : {solve_cmd, converge_cmd, diagnose_cmd, certify_cmd}) add_common(s, o);
    diagnose_cmd->add_option("--input", o.input, "grid file to diagnose instead of solving");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    try {
        if (*solve_cmd) return run_solve(o, out);
        if (*converge_cmd) return run_converge(o, out, err);
        if (*diagnose_cmd) return run_diagnose(o, out);
        return run_certify(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n" << "run 'parastep --help' for usage\n";
        return 1;
    }
}

}  // namespace parastep
