#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parastep/error.hpp"
#include "parastep/scheme.hpp"

using namespace parastep;
using testing_helpers::unit_mesh;

namespace {

Matrix sym2(double a, double b, double c) {
    Matrix X(2, 2);
    X << a, b, b, c;
    return X;
}

// c + l.x + m t + (a.x) t + x.Q x
SmoothTestFunction quadratic(const Vector& l, double m, const Vector& a, const Matrix& Q) {
    SmoothTestFunction f;
    f.value = [=](const ParabolicPoint& p) {
        const Vector x = Eigen::Map<const Vector>(p.x.data(), static_cast<Eigen::Index>(p.x.size()));
        return 0.25 + l.dot(x) + m * p.t + a.dot(x) * p.t + x.dot(Q * x);
    };
    f.time_derivative = [=](const ParabolicPoint& p) {
        const Vector x = Eigen::Map<const Vector>(p.x.data(), static_cast<Eigen::Index>(p.x.size()));
        return m + a.dot(x);
    };
    f.hessian = [=](const ParabolicPoint&) { return Matrix(2.0 * Q); };
    return f;
}

}  // namespace

TEST_CASE("stencils") {
    const Stencil s = Stencil::lattice(2, 2);
    CHECK(s.directions.size() == 4);
    CHECK(s.directions[0] == std::vector<int>{1, 0});
    CHECK(s.directions[1] == std::vector<int>{0, 1});
    CHECK(Stencil::lattice(2, 3).directions.size() == 12);
    CHECK(Stencil::lattice(1, 3).directions.size() == 2);
    Stencil bad{2, 2, {{1, 1}, {1, -1}}};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("1D Pucci scheme enumerates its regimes") {
    const auto S = build_monotone_scheme(NonlinearityDescriptor::pucci_plus(1, 1, 2), Stencil::lattice(1, 2));
    const auto M = build_monotone_scheme(NonlinearityDescriptor::pucci_minus(1, 1, 2), Stencil::lattice(1, 2));
    for (double r : {-3.0, -0.1, 0.0, 0.2, 5.0}) {
        const double v[] = {r};
        CHECK(S.F_h(v) == doctest::Approx(r > 0 ? 2 * r : r));
        CHECK(M.F_h(v) == doctest::Approx(r > 0 ? r : 2 * r));
    }
    CHECK(S.lambda0() == 1.0);
    CHECK(S.Lambda0() == 2.0);
}

TEST_CASE("linear schemes reproduce tr(A X) on quadratics") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const Matrix& A : {Matrix(Matrix::Identity(2, 2)), sym2(2, 1, 2), sym2(3, 0, 1)}) {
        const auto S = build_monotone_scheme(NonlinearityDescriptor::linear(A), Stencil::lattice(2, 2));
        for (int k = 0; k < 20; ++k) {
            const Matrix X = sym2(u(rng), u(rng), u(rng));
            std::vector<double> r;
            for (std::size_t d = 0; d < S.stencil().size(); ++d) {
                Vector y(2);
                y << S.stencil().directions[d][0], S.stencil().directions[d][1];
                r.push_back(y.dot(X * y) / y.squaredNorm());
            }
            CHECK(S.F_h(r) == doctest::Approx((A * X).trace()).epsilon(1e-12));
        }
    }
}

TEST_CASE("monotonicity of the built-in schemes") {
    std::vector<NonlinearityDescriptor> ops = {
        NonlinearityDescriptor::heat(1), NonlinearityDescriptor::heat(2), NonlinearityDescriptor::pucci_plus(1, 1, 2),
        NonlinearityDescriptor::pucci_minus(2, 1, 2), NonlinearityDescriptor::linear(sym2(2, 1, 2)),
        NonlinearityDescriptor::bellman_isaacs({{sym2(1, 0, 2), sym2(2, 0, 1)}, {sym2(1.5, 0, 1.5)}}, 1, 3)};
    for (const auto& F : ops) {
        for (int N : {2, 3}) {
            const auto S = build_monotone_scheme(F, Stencil::lattice(F.dim(), N));
            const auto rep = check_monotonicity(S, 2000);
            CHECK(rep.pass);
            CHECK(rep.positive_bounds);
            CHECK(rep.min_slope >= S.lambda0() - 1e-6);
            CHECK(rep.max_slope <= S.Lambda0() + 1e-6);
        }
    }
}

TEST_CASE("a custom F cannot be represented") {
    const auto F = NonlinearityDescriptor::custom(1, [](const Matrix& X) { return 1.5 * X(0, 0); }, {1.5, 1.5});
    CHECK_THROWS_WITH_AS(build_monotone_scheme(F, Stencil::lattice(1, 2)),
                         doctest::Contains("stencil cannot represent F"), Error);
}

TEST_CASE("consistency is exact on class P polynomials") {
    const MeshSpec spec = unit_mesh(2, 1.0 / 8, 0.5, 2);
    Vector l(2), a(2);
    l << 0.3, -1.2;
    a << 0.7, 0.2;
    const auto heat = build_monotone_scheme(NonlinearityDescriptor::heat(2), Stencil::lattice(2, 2));
    auto rep = consistency_error(heat, quadratic(l, -0.4, a, sym2(1.0, 0.6, -2.0)), spec, 2);
    for (double e : rep.sup_error) CHECK(e <= 1e-12 * 64 * 4);
    // Pucci schemes are exact when the Hessian is diagonal in the axis frame
    const auto P = build_monotone_scheme(NonlinearityDescriptor::pucci_plus(2, 1, 2), Stencil::lattice(2, 2));
    rep = consistency_error(P, quadratic(l, 0.5, a, sym2(1.0, 0.0, -2.0)), spec, 2);
    for (double e : rep.sup_error) CHECK(e <= 1e-12 * 64 * 4);
}

TEST_CASE("consistency error decreases on a smooth function") {
    const MeshSpec spec = unit_mesh(1, 1.0 / 8, 0.5, 2);
    SmoothTestFunction f;
    f.value = [](const ParabolicPoint& p) { return std::exp(-p.t) * std::sin(3 * p.x[0]); };
    f.time_derivative = [](const ParabolicPoint& p) { return -std::exp(-p.t) * std::sin(3 * p.x[0]); };
    f.hessian = [](const ParabolicPoint& p) {
        Matrix H(1, 1);
        H(0, 0) = -9 * std::exp(-p.t) * std::sin(3 * p.x[0]);
        return H;
    };
    f.d3_bound = 27;
    f.d4_bound = 81;
    f.tt_bound = 1;
    const auto S = build_monotone_scheme(NonlinearityDescriptor::pucci_minus(1, 1, 2), Stencil::lattice(1, 2));
    const auto rep = consistency_error(S, f, spec, 3);
    CHECK(rep.decreasing);
    CHECK(std::isfinite(rep.K_first_order));
    CHECK(rep.sup_error.back() < rep.sup_error.front());
}

TEST_CASE("difference quotients") {
    const MeshSpec spec = unit_mesh(2, 0.25, 0.25, 2);
    const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) {
        return p.x[0] * p.x[0] + 3 * p.x[0] * p.x[1] + 2 * p.t;
    });
    const std::size_t k = spec.linear_index(NodeIndex{{2, 2}, 3});
    const int e1[] = {1, 0}, d[] = {1, 1};
    CHECK(delta2_y(u, k, e1) == doctest::Approx(2.0));
    CHECK(delta2_y(u, k, d) == doctest::Approx((2.0 + 2 * 3.0) / 2.0));
    CHECK(delta_tau_minus(u, k) == doctest::Approx(2.0));
    CHECK_THROWS_WITH_AS(delta_tau_minus(u, spec.linear_index(NodeIndex{{2, 2}, 1})),
                         doctest::Contains("needs boundary band"), Error);
    const int far[] = {3, 0};
    CHECK_THROWS_WITH_AS(delta2_y(u, k, far), doctest::Contains("off-grid"), Error);
    const auto S = build_monotone_scheme(NonlinearityDescriptor::heat(2), Stencil::lattice(2, 2));
    CHECK_THROWS_WITH_AS(apply_scheme(S, u, spec.linear_index(NodeIndex{{1, 2}, 4})),
                         doctest::Contains("not interior"), Error);
}
