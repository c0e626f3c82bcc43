#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "parastep/config.hpp"
#include "parastep/convolutions.hpp"
#include "parastep/envelopes.hpp"
#include "parastep/scheme.hpp"
#include "parastep/solver.hpp"
#include "parastep/viscosity.hpp"

namespace parastep {

// --- exact solutions ---------------------------------------------------------------

/// Closed-form solution of u_t = F(D^2 u) on [0,1]^n, zero on the lateral faces.
struct ExactSolution {
    std::string id;
    std::size_t dim = 1;
    std::function<double(const ParabolicPoint&)> value;
    std::function<double(const ParabolicPoint&)> time_derivative;
    std::function<Matrix(const ParabolicPoint&)> hessian;
};

const std::vector<std::string>& exact_solution_ids();

/// heat_sine, pucci_plus_concave, pucci_minus_concave (1D), heat_2d_product (2D)
/// and zero (any n). lambda is used by pucci_plus_concave, Lambda by pucci_minus_concave.
ExactSolution exact_solution(const std::string& id, std::size_t n = 0, double lambda = 1.0, double Lambda = 2.0);

/// Value at a point (dimension taken from the point).
double exact_solution(const std::string& id, const ParabolicPoint& p, double lambda = 1.0, double Lambda = 2.0);

/// The operator each id solves.
NonlinearityDescriptor exact_solution_operator(const std::string& id, std::size_t n = 0, double lambda = 1.0,
                                               double Lambda = 2.0);

/// max |u_t - F(D^2 u)| over `samples` random points of [0,1]^n x [0,1].
double residual_self_check(const ExactSolution& u, const NonlinearityDescriptor& F, int samples = 1000,
                           std::uint64_t seed = 1);

// --- convergence studies -------------------------------------------------------------

struct ConvergenceRow {
    double h = 0.0;
    double sup_error = 0.0;
    double rate_pairwise = 0.0;  ///< NaN on the first row
    long iterations = 0;
    double max_residual = 0.0;
    double wall_seconds = 0.0;
    bool converged = false;
};

struct ConvergenceReport {
    std::string solution;
    std::uint64_t seed = 0;
    std::vector<ConvergenceRow> rows;
    std::optional<double> fitted_rate;  ///< empty when fewer than 3 rows or errors at solver tolerance
    std::string fit_note;
    bool monotone_refinement = true;  ///< false if some error grew under refinement
    std::string failure;              ///< non-empty if a solve failed; rows then stop before it

    bool complete() const { return failure.empty(); }
};

/// Least squares slope of log e against log h. Needs at least 3 positive errors.
std::optional<double> fit_rate(std::span<const double> h, std::span<const double> errors);
/// log(e_k-1 / e_k) / log(h_k-1 / h_k), NaN for k = 0.
std::vector<double> pairwise_rates(std::span<const double> h, std::span<const double> errors);

struct Problem {
    MeshSpec spec;
    SchemeDescriptor scheme;
    BoundaryData boundary;
};

SchemeDescriptor make_scheme(const ProblemConfig& cfg);
MeshSpec make_mesh(const ProblemConfig& cfg, double h);
/// Mesh, scheme and boundary data for one h (exact solution or data file).
Problem make_problem(const ProblemConfig& cfg, double h);

/// Per-h solves run on up to `threads` workers; rows are assembled in h order.
ConvergenceReport run_convergence_study(const ProblemConfig& cfg, std::uint64_t seed, int threads = 1);

/// Header "# parastep converge seed=.. solution=..", then h,sup_error,rate_pairwise,iterations.
void write_convergence_csv(std::ostream& out, const ConvergenceReport& r);
nlohmann::json to_json(const ConvergenceReport& r);

// --- diagnostics -----------------------------------------------------------------------

struct DiagnosticsBundle {
    std::uint64_t seed = 0;
    double h = 0.0;
    double delta = 0.0;
    double K = 0.0;  ///< first-order consistency constant of the scheme
    double violation_tolerance = 0.0;
    std::optional<FalsifierReport> super_side;
    std::optional<FalsifierReport> sub_side;
    std::size_t replay_failures = 0;
    std::optional<ConvolutionPropertyReport> convolution;
    std::optional<GoodSetReport> good_set;
    double good_set_r = 0.0;
    ParabolicPoint good_set_center;
    bool good_set_nonincreasing = true;
    std::optional<AbpDiagnostic> abp;
    double abp_shift = 0.0;  ///< constant added so the boundary data are nonnegative
    std::vector<std::string> notes;

    bool empty() const { return !super_side && !convolution && !good_set && !abp; }
    std::size_t falsifier_violations() const;
    /// Falsifier violations, failed replays, convolution failures, non-monotone good set.
    std::size_t property_violations() const;
};

DiagnosticsBundle run_diagnostics(const ProblemConfig& cfg, const MeshFunction& u, std::uint64_t seed);

nlohmann::json to_json(const DiagnosticsBundle& d);
void write_diagnostics_text(std::ostream& out, const DiagnosticsBundle& d);

}  // namespace parastep
