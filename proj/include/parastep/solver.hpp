#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parastep/error.hpp"
#include "parastep/geometry.hpp"
#include "parastep/scheme.hpp"

namespace parastep {

/// Prescribed values on the boundary nodes of U_h (every node that is not
/// interior for the mesh's N). Stored densely in linear node order with NaN at
/// interior nodes.
struct BoundaryData {
    enum class Provenance { exact_solution, supplied_table };

    std::vector<double> values;
    Provenance provenance = Provenance::exact_solution;

    static BoundaryData from_function(const MeshSpec& spec,
                                      const std::function<double(const ParabolicPoint&)>& f);
    /// Boundary values taken from a complete mesh function (interior values dropped).
    static BoundaryData from_table(const MeshFunction& table);

    /// Throws unless every boundary node carries a finite value.
    void validate(const MeshSpec& spec) const;
    double sup_abs() const;
};

enum class SolveMethod { damped_fixed_point, policy_iteration };

const char* to_string(SolveMethod m);
SolveMethod solve_method_from_string(const std::string& s);

struct SolveConfig {
    /// <= 0 selects 1e-10 (1 + sup |boundary|).
    double tolerance = 0.0;
    int max_iterations = 100000;
    /// <= 0 selects default_damping().
    double damping = 0.0;
    SolveMethod method = SolveMethod::damped_fixed_point;
};

/// omega = 1 / (1 + tau Lambda0 sum_y 2 / |h y|^2). With this choice the
/// Jacobi update w <- w - omega tau S_h[w] is order preserving and a sup-norm
/// contraction with factor 1 - omega.
double default_damping(const SchemeDescriptor& S, double h);

struct StepStats {
    int iterations = 0;
    double residual = 0.0;
    /// Max residual before each update (filled only when requested).
    std::vector<double> history;
};

struct SolveReport {
    std::vector<int> iterations_per_step;
    double max_residual = 0.0;
    double wall_seconds = 0.0;
    bool converged = false;
    double tolerance = 0.0;
    double damping = 0.0;
    SolveMethod method = SolveMethod::damped_fixed_point;

    long total_iterations() const;
};

class SolveFailure : public Error {
public:
    SolveFailure(int level, double residual, int iterations);
    int level() const { return level_; }
    double residual() const { return residual_; }

private:
    int level_;
    double residual_;
};

/// One implicit step at time level `level`: given u at level - 1 (spatial
/// slice) and the boundary slice (NaN at interior nodes), return the slice at
/// `level` with |S_h| <= tolerance at interior nodes and boundary values copied.
std::vector<double> implicit_step(const SchemeDescriptor& S, const MeshSpec& spec, int level,
                                  std::span<const double> u_prev, std::span<const double> boundary,
                                  const SolveConfig& cfg, StepStats* stats = nullptr,
                                  bool record_history = false);

/// March t = tau, 2 tau, ..., J tau. Levels below N^2 carry no interior nodes
/// and are copied from the boundary data.
std::pair<MeshFunction, SolveReport> solve(const SchemeDescriptor& S, const MeshSpec& spec,
                                           const BoundaryData& boundary, const SolveConfig& cfg = {});

/// max over interior nodes of |S_h[u]|.
double residual_sweep(const SchemeDescriptor& S, const MeshFunction& u);

}  // namespace parastep
