#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parastep/error.hpp"
#include "parastep/solver.hpp"

using namespace parastep;
using testing_helpers::unit_mesh;

namespace {

// Tridiagonal solve a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i.
std::vector<double> thomas(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                           std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

}  // namespace

TEST_CASE("one heat step matches a tridiagonal solve") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.25, 2);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::heat(1), Stencil::lattice(1, 2));
    const int cells = spec.cells(0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> prev(spec.spatial_count()), bnd(spec.spatial_count(), std::numeric_limits<double>::quiet_NaN());
    for (double& v : prev) v = u(rng);
    for (int i : {0, 1, cells - 1, cells}) bnd[static_cast<std::size_t>(i)] = u(rng);

    // (u_i - p_i) - (u_{i+1} + u_{i-1} - 2 u_i) = 0 since tau = h^2, interior i = 2..cells-2.
    const std::size_t m = static_cast<std::size_t>(cells - 3);
    std::vector<double> a(m, -1.0), b(m, 3.0), c(m, -1.0), d(m);
    for (std::size_t q = 0; q < m; ++q) d[q] = prev[q + 2];
    d.front() += bnd[1];
    d.back() += bnd[static_cast<std::size_t>(cells - 1)];
    const auto x = thomas(a, b, c, d);

    for (auto method : {SolveMethod::damped_fixed_point, SolveMethod::policy_iteration}) {
        SolveConfig cfg;
        cfg.tolerance = 1e-13;
        cfg.method = method;
        const auto w = implicit_step(S, spec, 5, prev, bnd, cfg);
        for (std::size_t q = 0; q < m; ++q) CHECK(w[q + 2] == doctest::Approx(x[q]).epsilon(1e-10));
        for (int i : {0, 1, cells - 1, cells}) CHECK(w[static_cast<std::size_t>(i)] == bnd[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("fixed point and policy iteration agree on Pucci") {
    const MeshSpec spec = unit_mesh(2, 1.0 / 8, 0.2, 2);
    for (const auto& F : {NonlinearityDescriptor::pucci_plus(2, 1, 3), NonlinearityDescriptor::pucci_minus(2, 1, 3)}) {
        const auto S = build_monotone_scheme(F, Stencil::lattice(2, 2));
        const auto bd = BoundaryData::from_function(spec, [](const ParabolicPoint& p) {
            return std::sin(3 * p.x[0]) * std::cos(2 * p.x[1]) + p.t;
        });
        SolveConfig a, b;
        a.tolerance = b.tolerance = 1e-11;
        b.method = SolveMethod::policy_iteration;
        const auto [ua, ra] = solve(S, spec, bd, a);
        const auto [ub, rb] = solve(S, spec, bd, b);
        CHECK(ra.converged);
        CHECK(rb.converged);
        for (std::size_t k = 0; k < spec.node_count(); ++k) CHECK(ua[k] == doctest::Approx(ub[k]).epsilon(1e-8));
        CHECK(residual_sweep(S, ua) <= 1e-9);
    }
}

TEST_CASE("comparison on ordered boundary data") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.1, 2);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::pucci_minus(1, 1, 2), Stencil::lattice(1, 2));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1), gap(0, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        auto lo = BoundaryData::from_function(spec, [&](const ParabolicPoint&) { return u(rng); });
        auto hi = lo;
        for (double& v : hi.values)
            if (!std::isnan(v)) v += gap(rng);
        SolveConfig cfg;
        cfg.tolerance = 1e-12;
        const auto a = solve(S, spec, lo, cfg).first;
        const auto b = solve(S, spec, hi, cfg).first;
        for (std::size_t k = 0; k < spec.node_count(); ++k) CHECK(a[k] <= b[k] + 1e-9);
    }
}

TEST_CASE("zero data gives zero") {
    const MeshSpec spec = unit_mesh(2, 1.0 / 8, 0.1, 2);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::heat(2), Stencil::lattice(2, 2));
    const auto [u, rep] = solve(S, spec, BoundaryData::from_function(spec, [](const ParabolicPoint&) { return 0.0; }));
    CHECK(u.sup_abs() == 0.0);
    CHECK(rep.converged);
}

TEST_CASE("solver failures") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.1, 2);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::heat(1), Stencil::lattice(1, 2));
    const auto bd = BoundaryData::from_function(spec, [](const ParabolicPoint& p) { return std::sin(3 * p.x[0]); });
    SolveConfig cfg;
    cfg.max_iterations = 2;
    cfg.tolerance = 1e-14;
    CHECK_THROWS_AS(solve(S, spec, bd, cfg), SolveFailure);
    BoundaryData broken = bd;
    broken.values[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solve(S, spec, broken), Error);
    CHECK(solve_method_from_string("policy") == SolveMethod::policy_iteration);
    CHECK_THROWS_AS(solve_method_from_string("newton"), Error);
}
