#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace parastep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EllipticityConstants {
    double lambda = 1.0;
    double Lambda = 1.0;
};

enum class NonlinearityKind { linear, pucci_plus, pucci_minus, bellman_isaacs, custom };

const char* to_string(NonlinearityKind kind);

/// Pucci extremal operators. Eigenvalues within 1e-10 of zero are dropped.
double pucci_minus(const Matrix& X, double lambda, double Lambda);
double pucci_plus(const Matrix& X, double lambda, double Lambda);

/// Throws unless X is square, finite and symmetric (to 1e-12 relative).
void require_symmetric(const Matrix& X);

/// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm(const Matrix& X);

/// F(X) for X in S^n, independent of (x, t) and of the gradient.
///
/// The constants are the ones for which
///   lambda |Y| <= F(X + Y) - F(X) <= Lambda |Y|,  Y >= 0,
/// holds with |Y| the spectral norm. For the built-in kinds they are derived
/// from the parameters: Pucci(l, L) in n dimensions gives (l, n L), a linear
/// A gives (lambda_min(A), tr A). `declared` replaces them (the declaration
/// is what verify_uniform_ellipticity checks).
class NonlinearityDescriptor {
public:
    static NonlinearityDescriptor linear(Matrix A);
    static NonlinearityDescriptor heat(std::size_t n);
    static NonlinearityDescriptor pucci_plus(std::size_t n, double lambda, double Lambda);
    static NonlinearityDescriptor pucci_minus(std::size_t n, double lambda, double Lambda);
    /// min over a of max over b of tr(A[a][b] X).
    static NonlinearityDescriptor bellman_isaacs(std::vector<std::vector<Matrix>> family,
                                                 double lambda, double Lambda);
    static NonlinearityDescriptor custom(std::size_t n, std::function<double(const Matrix&)> f,
                                         EllipticityConstants declared, std::string name = "custom");

    NonlinearityDescriptor with_constants(EllipticityConstants declared) const;
    /// X -> -F(-X); maps supersolutions of F to subsolutions of the dual.
    NonlinearityDescriptor dual() const;

    NonlinearityKind kind() const { return kind_; }
    std::size_t dim() const { return n_; }
    const EllipticityConstants& constants() const { return constants_; }
    const std::string& name() const { return name_; }

    /// Linear kind only.
    const Matrix& matrix() const;
    /// Pucci parameters (lambda, Lambda) as given, not the derived constants.
    double pucci_lambda() const { return pucci_lambda_; }
    double pucci_Lambda() const { return pucci_Lambda_; }
    /// Bellman-Isaacs family; the linear kind reports [[A]].
    const std::vector<std::vector<Matrix>>& family() const { return family_; }

    double operator()(const Matrix& X) const;

private:
    NonlinearityDescriptor() = default;

    NonlinearityKind kind_ = NonlinearityKind::linear;
    std::size_t n_ = 0;
    EllipticityConstants constants_;
    std::string name_;
    double pucci_lambda_ = 0.0;
    double pucci_Lambda_ = 0.0;
    std::vector<std::vector<Matrix>> family_;
    std::shared_ptr<const std::function<double(const Matrix&)>> custom_;
};

double evaluate_F(const NonlinearityDescriptor& F, const Matrix& X);

struct EllipticityReport {
    int trials = 0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    int violations = 0;
    bool pass = false;
};

/// Random X symmetric and Y >= 0 (of random rank, occasionally Y = 0) with
/// entries of size `probe_magnitude`. Checks the two-sided bound with the
/// declared constants; ratios are (F(X+Y) - F(X)) / |Y| over Y != 0.
EllipticityReport verify_uniform_ellipticity(const NonlinearityDescriptor& F, int trials,
                                             double probe_magnitude, std::uint64_t seed = 1,
                                             double tolerance = 1e-9);

}  // namespace parastep
