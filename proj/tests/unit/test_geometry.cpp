#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "parastep/error.hpp"
#include "parastep/geometry.hpp"

using namespace parastep;
using testing_helpers::unit_mesh;

TEST_CASE("parabolic distance") {
    ParabolicPoint p{{0.0, 0.0}, 0.0}, q{{3.0, 4.0}, 0.0};
    CHECK(parabolic_distance(p, q) == doctest::Approx(5.0));
    ParabolicPoint r{{0.0, 0.0}, 4.0};
    CHECK(parabolic_distance(p, r) == doctest::Approx(2.0));  // time scales like distance squared
    CHECK(euclidean_distance(p, r) == doctest::Approx(4.0));
    CHECK_THROWS_AS(parabolic_distance(p, ParabolicPoint{{1.0}, 0.0}), Error);
}

TEST_CASE("cylinder membership is open in space, half-open in time") {
    Cylinder back{{{0.5}, 1.0}, 0.5, Orientation::backward};
    CHECK(back.contains({{0.5}, 1.0}));
    CHECK_FALSE(back.contains({{0.5}, 0.75}));  // t - r^2 excluded
    CHECK(back.contains({{0.5}, 0.76}));
    CHECK_FALSE(back.contains({{1.0}, 1.0}));  // |x - y| = r excluded
    Cylinder fwd{{{0.5}, 1.0}, 0.5, Orientation::forward};
    CHECK_FALSE(fwd.contains({{0.5}, 1.0}));
    CHECK(fwd.contains({{0.5}, 1.25}));
}

TEST_CASE("mesh indexing round trips") {
    const MeshSpec spec(0.25, Box{{0.0, -1.0}, {1.0, 0.5}}, 0.3, 2);
    CHECK(spec.cells(0) == 4);
    CHECK(spec.cells(1) == 6);
    CHECK(spec.time_levels() == 4);  // floor(0.3 / 0.0625)
    CHECK(spec.horizon() == doctest::Approx(0.25));
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        const NodeIndex idx = spec.node(k);
        CHECK(spec.linear_index(idx) == k);
        const auto p = spec.point(k);
        REQUIRE(spec.locate(p).has_value());
        CHECK(*spec.locate(p) == k);
    }
    CHECK_FALSE(spec.locate({{0.1, 0.0}, 0.0625}).has_value());
}

TEST_CASE("mesh construction errors") {
    CHECK_THROWS_WITH_AS(MeshSpec(0.3, Box{{0.0}, {1.0}}, 1.0, 2), doctest::Contains("divide"), Error);
    CHECK_THROWS_AS(MeshSpec(0.25, Box{{0.0}, {1.0}}, 0.01, 2), Error);
    CHECK_THROWS_AS(MeshSpec(0.25, Box{{0.0}, {1.0}}, 1.0, 4), Error);
    const MeshSpec wide(0.25, Box{{0.0}, {1.0}}, 1.0, 3);
    CHECK_THROWS_WITH_AS(classify_mesh_points(wide), doctest::Contains("stencil exceeds domain"), Error);
}

TEST_CASE("interior split matches the distance to the parabolic boundary") {
    for (std::size_t n : {1u, 2u}) {
        for (int N : {2, 3}) {
            const MeshSpec spec = unit_mesh(n, 1.0 / 8, 0.5, N);
            const MeshPartition part = classify_mesh_points(spec);
            CHECK(part.interior.size() + part.boundary.size() == spec.node_count());
            for (std::size_t k = 0; k < spec.node_count(); ++k) {
                const auto p = spec.point(k);
                double d = std::sqrt(p.t);
                for (std::size_t i = 0; i < n; ++i) d = std::min({d, p.x[i], 1.0 - p.x[i]});
                const bool oracle = d >= N * spec.h() - 1e-12;
                CHECK(static_cast<bool>(part.interior_mask[k]) == oracle);
            }
            // levels below N^2 are entirely boundary
            for (std::size_t k : part.interior) CHECK(spec.level_of(k) >= N * N);
        }
    }
}

TEST_CASE("cylinder_nodes agrees with a scan") {
    const MeshSpec spec = unit_mesh(2, 1.0 / 8, 0.5, 2);
    for (auto o : {Orientation::backward, Orientation::forward}) {
        const Cylinder c{{{0.5, 0.375}, 0.25}, 0.3, o};
        std::vector<std::size_t> scan;
        for (std::size_t k = 0; k < spec.node_count(); ++k) {
            if (c.contains(spec.point(k))) scan.push_back(k);
        }
        CHECK(cylinder_nodes(c, spec) == scan);
        CHECK_FALSE(scan.empty());
    }
}

TEST_CASE("discrete Holder norm against pairs") {
    const MeshSpec spec = unit_mesh(1, 0.25, 0.25, 2);
    const MeshFunction u = testing_helpers::random_function(spec, 3);
    for (double eta : {1.0, 0.5}) {
        double semi = 0.0;
        for (std::size_t a = 0; a < spec.node_count(); ++a) {
            for (std::size_t b = a + 1; b < spec.node_count(); ++b) {
                semi = std::max(semi, std::abs(u[a] - u[b]) /
                                          std::pow(parabolic_distance(spec.point(a), spec.point(b)), eta));
            }
        }
        const HolderNorm hn = discrete_holder_norm(u, eta);
        CHECK(hn.seminorm == doctest::Approx(semi).epsilon(1e-14));
        CHECK(hn.norm == doctest::Approx(semi + u.sup_abs()).epsilon(1e-14));
    }
    // a function of x only has zero time seminorm
    const MeshFunction w = MeshFunction::sample(spec, [](const ParabolicPoint& p) { return p.x[0]; });
    CHECK(time_holder_seminorm(w, 0.5) == 0.0);
}

TEST_CASE("K box dimensions") {
    KBox k{{{0.0, 0.0}, 0.0}, 0.9};
    CHECK(k.half_width() == doctest::Approx(0.9 / (9.0 * std::sqrt(2.0))));
    CHECK(k.duration() == doctest::Approx(0.81 / 162.0));
    CHECK_FALSE(k.contains({{0.0, 0.0}, 0.0}));
    CHECK(k.contains({{0.0, 0.0}, k.duration()}));
}
