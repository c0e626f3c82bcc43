#include <random>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "parastep/error.hpp"
#include "parastep/harness.hpp"

using namespace parastep;

TEST_CASE("exact solutions") {
    CHECK(exact_solution("heat_sine", ParabolicPoint{{0.5}, 0.0}) == doctest::Approx(1.0));
    for (const auto& id : exact_solution_ids()) {
        const auto u = exact_solution(id);
        const auto F = exact_solution_operator(id, u.dim, 1.0, 2.0);
        CHECK(residual_self_check(u, F, 1000, 3) <= 1e-10);
        for (double t : {0.0, 0.1, 0.7}) {
            ParabolicPoint p{std::vector<double>(u.dim, 0.37), t};
            for (std::size_t i = 0; i < u.dim; ++i) {
                for (double face : {0.0, 1.0}) {
                    ParabolicPoint q = p;
                    q.x[i] = face;
                    CHECK(std::abs(u.value(q)) <= 1e-15);
                }
            }
        }
    }
    // the Pucci solution is not a heat solution
    const auto pp = exact_solution("pucci_minus_concave", 1, 1.0, 2.0);
    CHECK(residual_self_check(pp, NonlinearityDescriptor::heat(1)) > 1.0);
    CHECK_THROWS_AS(exact_solution("nope"), Error);
    CHECK_THROWS_AS(exact_solution("heat_sine", 2), Error);
}

TEST_CASE("rate fit oracle") {
    std::vector<double> h = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    for (double p : {0.5, 1.0, 2.0, 2.7}) {
        std::vector<double> e;
        for (double x : h) e.push_back(3.1 * std::pow(x, p));
        CHECK(std::abs(*fit_rate(h, e) - p) <= 1e-10);
        const auto pr = pairwise_rates(h, e);
        CHECK(std::isnan(pr[0]));
        for (std::size_t k = 1; k < pr.size(); ++k) CHECK(std::abs(pr[k] - p) <= 1e-10);
    }
    CHECK_FALSE(fit_rate(std::vector<double>{0.5, 0.25}, std::vector<double>{1, 0.5}).has_value());
    CHECK_FALSE(fit_rate(h, std::vector<double>{1, 0.5, 0.0, 0.1}).has_value());
}

TEST_CASE("convergence study on heat_sine") {
    ProblemConfig cfg;
    const auto r = run_convergence_study(cfg, 202, 2);
    REQUIRE(r.complete());
    REQUIRE(r.rows.size() == 4);
    for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k].sup_error < r.rows[k - 1].sup_error);
    REQUIRE(r.fitted_rate.has_value());
    CHECK(*r.fitted_rate >= 0.9);
    CHECK(r.monotone_refinement);
}

TEST_CASE("zero solution skips the fit") {
    ProblemConfig cfg;
    cfg.exact = "zero";
    const auto r = run_convergence_study(cfg, 1);
    for (const auto& row : r.rows) CHECK(row.sup_error <= 1e-10);
    CHECK_FALSE(r.fitted_rate.has_value());
    CHECK_FALSE(r.fit_note.empty());
}

TEST_CASE("doubling the domain keeps the error scale") {
    ProblemConfig a;
    a.h_list = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    ProblemConfig b = a;
    b.upper = {2.0};
    const auto ra = run_convergence_study(a, 1), rb = run_convergence_study(b, 1);
    for (std::size_t k = 0; k < ra.rows.size(); ++k) {
        CHECK(rb.rows[k].sup_error <= 2.0 * ra.rows[k].sup_error);
        CHECK(ra.rows[k].sup_error <= 2.0 * rb.rows[k].sup_error);
    }
}

TEST_CASE("a failing solve aborts with a partial report") {
    ProblemConfig cfg;
    cfg.solver.max_iterations = 50;
    cfg.solver.tolerance = 1e-14;
    const auto r = run_convergence_study(cfg, 1);
    CHECK_FALSE(r.complete());
    CHECK(r.rows.size() < cfg.h_list.size());
}

TEST_CASE("csv is deterministic and threads do not change it") {
    ProblemConfig cfg;
    std::ostringstream a, b;
    write_convergence_csv(a, run_convergence_study(cfg, 9, 1));
    write_convergence_csv(b, run_convergence_study(cfg, 9, 3));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# parastep converge seed=9", 0) == 0);
    CHECK(a.str().find("h,sup_error,rate_pairwise,iterations\n") != std::string::npos);
}

TEST_CASE("diagnostics bundle") {
    ProblemConfig cfg;
    cfg.h_list = {1.0 / 16};
    const Problem p = make_problem(cfg, 1.0 / 16);
    const auto u = solve(p.scheme, p.spec, p.boundary).first;

    SUBCASE("default heat run is clean") {
        cfg.diagnostics.good_set = false;  // needs a finer grid, covered by the acceptance run
        const auto d = run_diagnostics(cfg, u, 303);
        CHECK(d.falsifier_violations() == 0);
        CHECK(d.property_violations() == 0);
        CHECK(d.K > 0.0);
        REQUIRE(d.abp.has_value());
        std::ostringstream s;
        write_diagnostics_text(s, d);
        CHECK(s.str().find("[falsifier]") != std::string::npos);
        CHECK(to_json(d).contains("abp"));
    }
    SUBCASE("empty toggles give an empty bundle") {
        cfg.diagnostics.falsifier = cfg.diagnostics.convolution = cfg.diagnostics.good_set = cfg.diagnostics.abp = false;
        const auto d = run_diagnostics(cfg, u, 1);
        CHECK(d.empty());
        CHECK(d.property_violations() == 0);
    }
    SUBCASE("noise is reported") {
        cfg.diagnostics.good_set = false;
        std::vector<double> noisy(u.values().begin(), u.values().end());
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> n(-0.05, 0.05);
        for (double& v : noisy) v += n(rng);
        const auto d = run_diagnostics(cfg, MeshFunction(u.spec(), noisy), 1);
        CHECK(d.falsifier_violations() > 0);
        CHECK(d.replay_failures == 0);
    }
}
