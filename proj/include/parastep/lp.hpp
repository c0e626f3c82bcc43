#pragma once

#include <vector>

#include "parastep/nonlinearity.hpp"

namespace parastep {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    /// Simplex multipliers pi with c_j - pi . A_j >= 0 at optimality.
    Vector duals;
    double objective = 0.0;
    std::vector<int> basis;
};

/// min c.x subject to A x = b, x >= 0, by a dense revised simplex.
///
/// Meant for few rows (m up to a few dozen) and moderately many columns. Uses
/// Dantzig pricing and falls back to Bland's rule after a run of degenerate
/// pivots. If `start_basis` is a feasible basis phase one is skipped;
/// otherwise artificial variables are added.
LpResult solve_lp(const Matrix& A, const Vector& b, const Vector& c,
                  const std::vector<int>& start_basis = {}, double tol = 1e-11, int max_iterations = 20000);

}  // namespace parastep
