#include "parastep/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "parastep/error.hpp"

namespace parastep {

namespace {

struct Simplex {
    const Matrix& A;
    const Vector& b;
    double tol;
    std::vector<int> basis;
    std::vector<char> allowed;  // columns that may enter
    Vector xB;
    Vector pi;
    Eigen::PartialPivLU<Matrix> lu;

    Simplex(const Matrix& A_, const Vector& b_, double tol_) : A(A_), b(b_), tol(tol_) {}

    bool factor() {
        const auto m = A.rows();
        Matrix B(m, m);
        for (Eigen::Index r = 0; r < m; ++r) B.col(r) = A.col(basis[static_cast<std::size_t>(r)]);
        lu.compute(B);
        const double det = std::abs(lu.determinant());
        if (!(det > 1e-300)) return false;
        xB = lu.solve(b);
        return xB.allFinite();
    }

    // Returns optimal / unbounded / iteration_limit for the given costs.
    LpStatus run(const Vector& c, int max_iter, int& iters) {
        const auto m = A.rows();
        const auto n = A.cols();
        int degenerate = 0;
        std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
        for (; iters < max_iter; ++iters) {
            if (!factor()) throw Error("simplex basis became singular");
            std::fill(in_basis.begin(), in_basis.end(), 0);
            for (int j : basis) in_basis[static_cast<std::size_t>(j)] = 1;
            Vector cB(m);
            for (Eigen::Index r = 0; r < m; ++r) cB[r] = c[basis[static_cast<std::size_t>(r)]];
            pi = lu.transpose().solve(cB);

            const bool bland = degenerate > 30;
            int enter = -1;
            double best = -tol * (1.0 + c.cwiseAbs().maxCoeff());
            for (Eigen::Index j = 0; j < n; ++j) {
                if (in_basis[static_cast<std::size_t>(j)] || !allowed[static_cast<std::size_t>(j)]) continue;
                const double d = c[j] - pi.dot(A.col(j));
                if (d < best) {
                    enter = static_cast<int>(j);
                    if (bland) break;
                    best = d;
                }
            }
            if (enter < 0) return LpStatus::optimal;

            const Vector u = lu.solve(A.col(enter));
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < m; ++r) {
                if (u[r] <= 1e-12) continue;
                const double q = std::max(0.0, xB[r]) / u[r];
                const bool tie_break = leave >= 0 && q <= ratio + 1e-15 &&
                                       basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)];
                if (leave < 0 || q < ratio - 1e-15 || tie_break) {
                    ratio = std::min(ratio, q);
                    leave = static_cast<int>(r);
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            degenerate = ratio <= 1e-15 ? degenerate + 1 : 0;
            basis[static_cast<std::size_t>(leave)] = enter;
        }
        return LpStatus::iteration_limit;
    }
};

}  // namespace

LpResult solve_lp(const Matrix& A0, const Vector& b0, const Vector& c, const std::vector<int>& start_basis,
                  double tol, int max_iterations) {
    const auto m = A0.rows();
    const auto n = A0.cols();
    if (b0.size() != m || c.size() != n || m == 0) throw Error("LP dimensions do not match");

    LpResult res;
    int iters = 0;

    // Try the supplied basis first.
    if (static_cast<Eigen::Index>(start_basis.size()) == m) {
        Simplex s(A0, b0, tol);
        s.basis = start_basis;
        s.allowed.assign(static_cast<std::size_t>(n), 1);
        if (s.factor() && s.xB.minCoeff() >= -1e-12) {
            res.status = s.run(c, max_iterations, iters);
            if (res.status == LpStatus::optimal) {
                s.factor();
                res.x = Vector::Zero(n);
                for (Eigen::Index r = 0; r < m; ++r) res.x[s.basis[static_cast<std::size_t>(r)]] = std::max(0.0, s.xB[r]);
                res.duals = s.pi;
                res.objective = c.dot(res.x);
                res.basis = s.basis;
            }
            return res;
        }
    }

    // Phase one with artificials on sign-normalized rows.
    Matrix A(m, n + m);
    Vector b = b0;
    A.leftCols(n) = A0;
    A.rightCols(m).setIdentity();
    for (Eigen::Index r = 0; r < m; ++r) {
        if (b[r] < 0.0) {
            b[r] = -b[r];
            A.row(r).head(n) *= -1.0;
        }
    }
    Simplex s(A, b, tol);
    s.allowed.assign(static_cast<std::size_t>(n + m), 1);
    for (Eigen::Index r = 0; r < m; ++r) s.basis.push_back(static_cast<int>(n + r));
    Vector c1 = Vector::Zero(n + m);
    c1.tail(m).setOnes();
    const LpStatus p1 = s.run(c1, max_iterations, iters);
    if (p1 == LpStatus::iteration_limit) {
        res.status = p1;
        return res;
    }
    s.factor();
    double infeas = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (s.basis[static_cast<std::size_t>(r)] >= n) infeas += std::max(0.0, s.xB[r]);
    }
    if (infeas > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
        res.status = LpStatus::infeasible;
        return res;
    }
    // Pivot zero-level artificials out where possible; rows where that fails are redundant.
    for (Eigen::Index r = 0; r < m; ++r) {
        if (s.basis[static_cast<std::size_t>(r)] < n) continue;
        s.factor();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::find(s.basis.begin(), s.basis.end(), static_cast<int>(j)) != s.basis.end()) continue;
            const Vector u = s.lu.solve(A.col(j));
            if (std::abs(u[r]) > 1e-9) {
                s.basis[static_cast<std::size_t>(r)] = static_cast<int>(j);
                break;
            }
        }
    }
    for (Eigen::Index j = n; j < n + m; ++j) s.allowed[static_cast<std::size_t>(j)] = 0;

    Vector c2 = Vector::Zero(n + m);
    c2.head(n) = c;
    res.status = s.run(c2, max_iterations, iters);
    if (res.status != LpStatus::optimal) return res;
    s.factor();
    res.x = Vector::Zero(n);
    for (Eigen::Index r = 0; r < m; ++r) {
        const int j = s.basis[static_cast<std::size_t>(r)];
        if (j < n) res.x[j] = std::max(0.0, s.xB[r]);
    }
    // Undo the row sign flips on the multipliers.
    res.duals = s.pi;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (b0[r] < 0.0) res.duals[r] = -res.duals[r];
    }
    res.objective = c.dot(res.x);
    res.basis = s.basis;
    return res;
}

}  // namespace parastep
