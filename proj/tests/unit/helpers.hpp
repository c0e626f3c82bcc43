#pragma once

#include <random>

#include "parastep/geometry.hpp"

namespace testing_helpers {

inline parastep::MeshSpec unit_mesh(std::size_t n, double h, double T, int N = 2) {
    return parastep::MeshSpec(h, parastep::Box{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}, T, N);
}

inline parastep::MeshFunction random_function(const parastep::MeshSpec& spec, std::uint64_t seed,
                                              double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-scale, scale);
    std::vector<double> v(spec.node_count());
    for (double& x : v) x = unif(rng);
    return parastep::MeshFunction(spec, std::move(v));
}

}  // namespace testing_helpers
