#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "parastep/envelopes.hpp"
#include "parastep/error.hpp"

using namespace parastep;
using testing_helpers::random_function;

namespace {

// Largest affine minorant through grid points of w, evaluated at every node.
// 1D: lines through two nodes; 2D: planes through three non-collinear nodes.
std::vector<double> affine_minorant_oracle(const MeshSpec& spec, const std::vector<double>& w) {
    const std::size_t S = spec.spatial_count();
    std::vector<std::vector<double>> X;
    for (std::size_t s = 0; s < S; ++s) X.push_back(spec.spatial_point(s));
    std::vector<double> best(S, -1e300);
    auto consider = [&](auto&& plane) {
        for (std::size_t s = 0; s < S; ++s)
            if (plane(X[s]) > w[s] + 1e-12) return;
        for (std::size_t s = 0; s < S; ++s) best[s] = std::max(best[s], plane(X[s]));
    };
    if (spec.dim() == 1) {
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = a + 1; b < S; ++b) {
                const double slope = (w[b] - w[a]) / (X[b][0] - X[a][0]);
                consider([&](const std::vector<double>& x) { return w[a] + slope * (x[0] - X[a][0]); });
            }
    } else {
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = a + 1; b < S; ++b)
                for (std::size_t c = b + 1; c < S; ++c) {
                    const double ux = X[b][0] - X[a][0], uy = X[b][1] - X[a][1];
                    const double vx = X[c][0] - X[a][0], vy = X[c][1] - X[a][1];
                    const double det = ux * vy - uy * vx;
                    if (std::abs(det) < 1e-12) continue;
                    const double du = w[b] - w[a], dv = w[c] - w[a];
                    const double gx = (du * vy - dv * uy) / det, gy = (ux * dv - vx * du) / det;
                    consider([&](const std::vector<double>& x) {
                        return w[a] + gx * (x[0] - X[a][0]) + gy * (x[1] - X[a][1]);
                    });
                }
    }
    return best;
}

std::vector<double> oracle_envelope(const MeshFunction& u) {
    const MeshSpec& spec = u.spec();
    std::vector<double> out(spec.node_count());
    std::vector<double> run(spec.spatial_count(), 1e300);
    for (int j = 1; j <= spec.time_levels(); ++j) {
        for (std::size_t s = 0; s < spec.spatial_count(); ++s) run[s] = std::min(run[s], u[spec.linear_index(s, j)]);
        const auto g = affine_minorant_oracle(spec, run);
        for (std::size_t s = 0; s < spec.spatial_count(); ++s) out[spec.linear_index(s, j)] = g[s];
    }
    return out;
}

}  // namespace

TEST_CASE("lower monotone envelope equals the affine minorant oracle") {
    int instances = 0;
    for (int trial = 0; trial < 16; ++trial) {
        const bool two = trial % 2 == 1;
        const MeshSpec spec = two ? MeshSpec(0.25, Box{{0, 0}, {1, 1}}, 0.25, 2)
                                  : MeshSpec(1.0 / 16, Box{{0}, {1}}, 0.02, 2);
        REQUIRE(spec.node_count() <= 500);
        const MeshFunction u = random_function(spec, 500 + trial);
        const MeshFunction g = lower_monotone_envelope(u);
        const auto o = oracle_envelope(u);
        for (std::size_t k = 0; k < spec.node_count(); ++k) CHECK(std::abs(g[k] - o[k]) <= 1e-9);
        ++instances;
    }
    CHECK(instances == 16);
}

TEST_CASE("envelope idempotence and monotonicity") {
    const MeshSpec spec(0.25, Box{{0, 0}, {1, 1}}, 0.25, 2);
    const MeshFunction u = random_function(spec, 3);
    const MeshFunction g = lower_monotone_envelope(u);
    const MeshFunction gg = lower_monotone_envelope(g);
    for (std::size_t k = 0; k < spec.node_count(); ++k) {
        CHECK(std::abs(gg[k] - g[k]) <= 1e-12);
        CHECK(g[k] <= u[k] + 1e-12);
    }
    std::vector<double> bigger(u.values().begin(), u.values().end());
    for (double& v : bigger) v += 0.1;
    const MeshFunction gb = lower_monotone_envelope(MeshFunction(spec, bigger));
    for (std::size_t k = 0; k < spec.node_count(); ++k) CHECK(gb[k] >= g[k] - 1e-12);
    const MeshFunction up = upper_monotone_envelope(u);
    for (std::size_t k = 0; k < spec.node_count(); ++k) CHECK(up[k] >= u[k] - 1e-12);
}

TEST_CASE("contact set and ABP diagnostic") {
    const MeshSpec spec(1.0 / 16, Box{{-0.5}, {0.5}}, 0.25, 2);
    // dip function: zero on the faces and at t = tau, negative inside
    const MeshFunction u = MeshFunction::sample(spec, [](const ParabolicPoint& p) {
        return -(0.25 - p.x[0] * p.x[0]) * (p.t - 1.0 / 256);
    });
    const auto d = abp_diagnostic(u);
    CHECK(d.lhs > 0.0);
    CHECK(d.contact_nodes > 0);
    CHECK(std::isfinite(d.ratio));
    CHECK(d.ratio > 0.0);
    const MeshFunction g = lower_monotone_envelope(u);
    const ContactSet c = contact_set(u, g);
    for (std::size_t k : c.nodes) CHECK(std::abs(u[k] - g[k]) <= c.tolerance);
    // negative boundary data is rejected
    const MeshFunction neg = MeshFunction::sample(spec, [](const ParabolicPoint&) { return -1.0; });
    CHECK_THROWS_AS(abp_diagnostic(neg), Error);
}
