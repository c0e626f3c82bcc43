#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parastep/error.hpp"
#include "parastep/solver.hpp"
#include "parastep/viscosity.hpp"

using namespace parastep;
using testing_helpers::unit_mesh;

TEST_CASE("paraboloid evaluation") {
    const Paraboloid z = Paraboloid::zero(2);
    CHECK(z({{0.3, -1.0}, 2.0}) == 0.0);
    Paraboloid half = Paraboloid::zero(2);
    half.Q = 0.5 * Matrix::Identity(2, 2);
    const auto [pt, hess] = paraboloid_derivatives(half, {{1.0, 2.0}, 0.5});
    CHECK(pt == 0.0);
    CHECK((hess - Matrix::Identity(2, 2)).norm() == 0.0);
    CHECK(half.in_P_infinity());
    CHECK(half.in_P_M_plus(1.0));
    CHECK_FALSE(half.in_P_M_minus(1.0));
    CHECK_THROWS_AS(half({{1.0}, 0.0}), Error);
}

TEST_CASE("random paraboloid derivatives against finite differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        Paraboloid P = Paraboloid::zero(2);
        P.c = u(rng);
        P.l << u(rng), u(rng);
        P.m = u(rng);
        P.a << u(rng), u(rng);
        P.Q << u(rng), 0, 0, u(rng);
        P.Q(0, 1) = P.Q(1, 0) = u(rng);
        const ParabolicPoint p{{u(rng), u(rng)}, u(rng)};
        const double e = 1e-4;
        auto at = [&](double dx0, double dx1, double dt) {
            return P({{p.x[0] + dx0, p.x[1] + dx1}, p.t + dt});
        };
        const double pt = (at(0, 0, e) - at(0, 0, -e)) / (2 * e);
        CHECK(pt == doctest::Approx(P.time_derivative(p.x)).epsilon(1e-6));
        Matrix H(2, 2);
        H(0, 0) = (at(e, 0, 0) + at(-e, 0, 0) - 2 * at(0, 0, 0)) / (e * e);
        H(1, 1) = (at(0, e, 0) + at(0, -e, 0) - 2 * at(0, 0, 0)) / (e * e);
        H(0, 1) = H(1, 0) = (at(e, e, 0) - at(e, -e, 0) - at(-e, e, 0) + at(-e, -e, 0)) / (4 * e * e);
        CHECK((H - P.hessian()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("paraboloid about a point") {
    Vector l(1), a(1);
    l << 0.5;
    a << -2.0;
    Matrix Q(1, 1);
    Q << 3.0;
    const ParabolicPoint o{{0.25}, 0.75};
    const Paraboloid P = Paraboloid::about(o, 1.5, l, 0.25, a, Q);
    for (double z : {-0.3, 0.0, 0.2})
        for (double s : {-0.1, 0.0, 0.4}) {
            const double expect = 1.5 + 0.5 * z + 0.25 * s - 2.0 * z * s + 3.0 * z * z;
            CHECK(P({{0.25 + z}, 0.75 + s}) == doctest::Approx(expect).epsilon(1e-13));
        }
}

TEST_CASE("falsifier flags v = -t with a replayable certificate") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.2, 2);
    const MeshFunction v = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return -p.t; });
    const auto F = NonlinearityDescriptor::heat(1);
    FalsifierConfig cfg;
    cfg.delta = 2 * spec.h();
    const auto rep = delta_falsifier(v, F, cfg);
    REQUIRE_FALSE(rep.violations.empty());
    CHECK(rep.violations.size() == rep.nodes_tested);
    for (const auto& c : rep.violations) {
        CHECK(c.margin <= -1.0 + 1e-9);
        CHECK(c.P.in_P_infinity());
        const auto r = replay_certificate(v, F, c, cfg.delta, rep.touch_tolerance, rep.violation_tolerance);
        CHECK(r.touches);
        CHECK(r.violates);
    }
    // v = -t is a subsolution (u_t = -1 <= 0), so the sub side is clean
    cfg.side = Side::sub;
    CHECK(delta_falsifier(v, F, cfg).violations.empty());
}

TEST_CASE("exact paraboloid solutions are clean") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.2, 2);
    const MeshFunction v = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return p.x[0] * p.x[0] + 2 * p.t; });
    for (Side side : {Side::super, Side::sub}) {
        FalsifierConfig cfg;
        cfg.delta = 2 * spec.h();
        cfg.side = side;
        CHECK(delta_falsifier(v, NonlinearityDescriptor::heat(1), cfg).violations.empty());
    }
}

TEST_CASE("computed heat solution is clean") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.25, 2);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::heat(1), Stencil::lattice(1, 2));
    const auto u = solve(S, spec, BoundaryData::from_function(spec, [](const ParabolicPoint& p) {
                                   return std::exp(-M_PI * M_PI * p.t) * std::sin(M_PI * p.x[0]);
                               })).first;
    for (Side side : {Side::super, Side::sub}) {
        FalsifierConfig cfg;
        cfg.delta = 2 * spec.h();
        cfg.side = side;
        cfg.violation_tolerance = 1e-3;
        const auto rep = delta_falsifier(u, S.source(), cfg);
        CHECK(rep.violations.empty());
        CHECK(rep.touching > 0);
    }
}

TEST_CASE("falsifier sign symmetry") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.1, 2);
    const MeshFunction v = testing_helpers::random_function(spec, 77);
    std::vector<double> neg(v.values().begin(), v.values().end());
    for (double& x : neg) x = -x;
    const MeshFunction w(spec, neg);
    const auto F = NonlinearityDescriptor::pucci_plus(1, 1, 2);
    FalsifierConfig a, b;
    a.delta = b.delta = 2 * spec.h();
    b.side = Side::sub;
    const auto ra = delta_falsifier(v, F, a);
    const auto rb = delta_falsifier(w, F.dual(), b);
    REQUIRE(ra.violations.size() == rb.violations.size());
    CHECK_FALSE(ra.violations.empty());
    for (std::size_t k = 0; k < ra.violations.size(); ++k) {
        CHECK(ra.violations[k].node == rb.violations[k].node);
        CHECK(ra.violations[k].margin == doctest::Approx(-rb.violations[k].margin).epsilon(1e-12));
    }
}

TEST_CASE("delta too small") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 16, 0.1, 2);
    const MeshFunction v = MeshFunction::sample(spec, [](const ParabolicPoint&) { return 0.0; });
    FalsifierConfig cfg;
    cfg.delta = spec.h();
    CHECK_THROWS_WITH_AS(delta_falsifier(v, NonlinearityDescriptor::heat(1), cfg), doctest::Contains("delta too small"),
                         Error);
}

TEST_CASE("Psi_M membership") {
    const MeshSpec spec(1.0 / 16, Box{{-0.5}, {0.5}}, 0.2, 2);
    const ParabolicPoint c{{0.0}, 4.0 / 256};
    const Cylinder region{c, 0.4, Orientation::forward};
    const std::size_t node = *spec.locate({{0.0}, 20.0 / 256});

    SUBCASE("class P polynomial") {
        const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) {
            return 1 + 2 * p.x[0] - p.t + 3 * p.x[0] * p.t + 5 * p.x[0] * p.x[0];
        });
        const auto m = psi_M_membership(u, node, 1e-6, region);
        CHECK(m.worst_ratio <= 1e-8);
        CHECK(m.member);
        CHECK(m.P.Q(0, 0) == doctest::Approx(5.0));
        CHECK(m.P.a[0] == doctest::Approx(3.0));
    }
    SUBCASE("cubic at the origin") {
        const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return std::pow(std::abs(p.x[0]), 3); });
        const auto m = psi_M_membership(u, node, 1.0, region);
        CHECK(m.member);
        CHECK(m.worst_ratio <= 1.0 + 1e-9);
        CHECK(m.worst_ratio > 0.5);
        // nesting in M
        bool prev = false;
        for (double M : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
            const bool now = psi_M_membership(u, node, M, region).member;
            CHECK((!prev || now));
            prev = now;
        }
    }
    SUBCASE("errors") {
        const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint&) { return 0.0; });
        CHECK_THROWS_AS(psi_M_membership(u, *spec.locate({{0.0}, 2.0 / 256}), 1.0, region), Error);
        const Cylinder tiny{c, 0.07, Orientation::forward};
        CHECK_THROWS_WITH_AS(psi_M_membership(u, *spec.locate({{0.0}, 5.0 / 256}), 1.0, tiny),
                             doctest::Contains("fewer points"), Error);
    }
}

TEST_CASE("G_M membership and the first order budget") {
    const MeshSpec spec(1.0 / 16, Box{{-0.5}, {0.5}}, 0.2, 2);
    const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return p.x[0] * p.x[0]; });
    const Cylinder region{{{0.0}, 4.0 / 256}, 0.4, Orientation::forward};
    const std::size_t node = *spec.locate({{0.0}, 20.0 / 256});
    const auto ok = g_M_membership(u, node, 2.0, region);
    CHECK(ok.upper);
    CHECK(ok.lower);
    CHECK(ok.expansion);
    CHECK(std::abs(ok.p[0]) <= 1e-9);
    const auto bad = g_M_membership(u, node, 1.5, region);
    CHECK_FALSE(bad.upper);
    CHECK(bad.lower);
    CHECK_FALSE(bad.expansion);
    // declared expansions really obey the budget
    for (std::size_t k : cylinder_nodes(region, spec)) {
        const auto y = spec.point(k);
        if (y.t > spec.point(node).t) continue;
        const double z = y.x[0];
        CHECK(std::abs(u[k] - u[node] - ok.p[0] * z) <= z * z + 2.0 * std::abs(y.t - spec.point(node).t) + 1e-12);
    }
}

TEST_CASE("good set of a quadratic solution is everything") {
    const MeshSpec spec(1.0 / 32, Box{{-0.5}, {0.5}}, 0.25, 2);
    const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return p.x[0] * p.x[0] + 2 * p.t; });
    const ParabolicPoint c{{0.0}, 4.0 / 1024};
    const double Ms[] = {1, 2, 4};
    const auto g = good_set_measure(u, Ms, KBox{c, 0.4}, Cylinder{c, 0.4, Orientation::forward});
    CHECK(g.box_nodes > 0);
    for (double f : g.bad_fraction) CHECK(f == 0.0);
    CHECK_FALSE(g.fitted);
}
