#include "parastep/nonlinearity.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parastep/error.hpp"

namespace parastep {

namespace {

constexpr double kEigenZero = 1e-10;

Vector eigenvalues(const Matrix& X) {
    require_symmetric(X);
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigen-decomposition failed");
    return es.eigenvalues();
}

void check_pucci_params(double lambda, double Lambda) {
    if (!(lambda > 0.0) || !(Lambda >= lambda) || !std::isfinite(Lambda)) {
        throw Error("Pucci parameters need 0 < lambda <= Lambda");
    }
}

void check_dim(std::size_t n, const Matrix& X) {
    if (static_cast<std::size_t>(X.rows()) != n) {
        throw Error("matrix dimension " + std::to_string(X.rows()) + " does not match n = " +
                    std::to_string(n));
    }
}

}  // namespace

const char* to_string(NonlinearityKind kind) {
    switch (kind) {
        case NonlinearityKind::linear: return "linear";
        case NonlinearityKind::pucci_plus: return "pucci_plus";
        case NonlinearityKind::pucci_minus: return "pucci_minus";
        case NonlinearityKind::bellman_isaacs: return "bellman_isaacs";
        case NonlinearityKind::custom: return "custom";
    }
    return "?";
}

void require_symmetric(const Matrix& X) {
    if (X.rows() != X.cols() || X.rows() == 0) throw Error("matrix must be square and non-empty");
    if (!X.allFinite()) throw Error("matrix has non-finite entries");
    const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error("matrix is not symmetric");
    }
}

double spectral_norm(const Matrix& X) { return eigenvalues(X).cwiseAbs().maxCoeff(); }

double pucci_minus(const Matrix& X, double lambda, double Lambda) {
    double pos = 0.0, neg = 0.0;
    for (double e : eigenvalues(X)) {
        if (e > kEigenZero) pos += e;
        else if (e < -kEigenZero) neg += e;
    }
    return lambda * pos + Lambda * neg;
}

double pucci_plus(const Matrix& X, double lambda, double Lambda) {
    double pos = 0.0, neg = 0.0;
    for (double e : eigenvalues(X)) {
        if (e > kEigenZero) pos += e;
        else if (e < -kEigenZero) neg += e;
    }
    return Lambda * pos + lambda * neg;
}

NonlinearityDescriptor NonlinearityDescriptor::linear(Matrix A) {
    require_symmetric(A);
    const Vector e = eigenvalues(A);
    if (e.minCoeff() <= 0.0) throw Error("linear F needs a positive definite matrix");
    NonlinearityDescriptor F;
    F.kind_ = NonlinearityKind::linear;
    F.n_ = static_cast<std::size_t>(A.rows());
    F.constants_ = {e.minCoeff(), A.trace()};
    F.name_ = "linear";
    F.family_.assign(1, std::vector<Matrix>(1, std::move(A)));
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::heat(std::size_t n) {
    NonlinearityDescriptor F = linear(Matrix::Identity(n, n));
    F.name_ = "heat";
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::pucci_plus(std::size_t n, double lambda, double Lambda) {
    check_pucci_params(lambda, Lambda);
    if (n == 0) throw Error("dimension must be positive");
    NonlinearityDescriptor F;
    F.kind_ = NonlinearityKind::pucci_plus;
    F.n_ = n;
    F.pucci_lambda_ = lambda;
    F.pucci_Lambda_ = Lambda;
    F.constants_ = {lambda, static_cast<double>(n) * Lambda};
    F.name_ = "pucci_plus";
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::pucci_minus(std::size_t n, double lambda, double Lambda) {
    NonlinearityDescriptor F = pucci_plus(n, lambda, Lambda);
    F.kind_ = NonlinearityKind::pucci_minus;
    F.name_ = "pucci_minus";
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::bellman_isaacs(std::vector<std::vector<Matrix>> family,
                                                              double lambda, double Lambda) {
    check_pucci_params(lambda, Lambda);
    if (family.empty()) throw Error("bellman_isaacs family is empty");
    const std::size_t n = family.front().empty() ? 0 : static_cast<std::size_t>(family.front().front().rows());
    if (n == 0) throw Error("bellman_isaacs family has an empty group");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& group : family) {
        if (group.empty()) throw Error("bellman_isaacs family has an empty group");
        for (const Matrix& A : group) {
            check_dim(n, A);
            const Vector e = eigenvalues(A);
            if (e.minCoeff() < lambda - 1e-12 || e.maxCoeff() > Lambda + 1e-12) {
                throw Error("bellman_isaacs member has eigenvalues outside [lambda, Lambda]");
            }
            lo = std::min(lo, e.minCoeff());
            hi = std::max(hi, A.trace());
        }
    }
    NonlinearityDescriptor F;
    F.kind_ = NonlinearityKind::bellman_isaacs;
    F.n_ = n;
    F.pucci_lambda_ = lambda;
    F.pucci_Lambda_ = Lambda;
    F.constants_ = {lo, hi};
    F.name_ = "bellman_isaacs";
    F.family_ = std::move(family);
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::custom(std::size_t n, std::function<double(const Matrix&)> f,
                                                      EllipticityConstants declared, std::string name) {
    if (n == 0) throw Error("dimension must be positive");
    if (!f) throw Error("custom F needs a callable");
    if (!(declared.lambda > 0.0) || !(declared.Lambda >= declared.lambda)) {
        throw Error("declared constants need 0 < lambda <= Lambda");
    }
    NonlinearityDescriptor F;
    F.kind_ = NonlinearityKind::custom;
    F.n_ = n;
    F.constants_ = declared;
    F.name_ = std::move(name);
    F.custom_ = std::make_shared<const std::function<double(const Matrix&)>>(std::move(f));
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::with_constants(EllipticityConstants declared) const {
    if (!(declared.lambda > 0.0) || !(declared.Lambda >= declared.lambda)) {
        throw Error("declared constants need 0 < lambda <= Lambda");
    }
    NonlinearityDescriptor F = *this;
    F.constants_ = declared;
    return F;
}

NonlinearityDescriptor NonlinearityDescriptor::dual() const {
    switch (kind_) {
        case NonlinearityKind::linear: return *this;
        case NonlinearityKind::pucci_plus: {
            NonlinearityDescriptor F = *this;
            F.kind_ = NonlinearityKind::pucci_minus;
            F.name_ = "pucci_minus";
            return F;
        }
        case NonlinearityKind::pucci_minus: {
            NonlinearityDescriptor F = *this;
            F.kind_ = NonlinearityKind::pucci_plus;
            F.name_ = "pucci_plus";
            return F;
        }
        default: {
            auto self = std::make_shared<const NonlinearityDescriptor>(*this);
            return custom(n_, [self](const Matrix& X) { return -(*self)(-X); }, constants_,
                          name_ + "_dual");
        }
    }
}

const Matrix& NonlinearityDescriptor::matrix() const {
    if (kind_ != NonlinearityKind::linear) throw Error("matrix() is only defined for linear F");
    return family_.front().front();
}

double NonlinearityDescriptor::operator()(const Matrix& X) const {
    require_symmetric(X);
    check_dim(n_, X);
    switch (kind_) {
        case NonlinearityKind::linear: return (matrix() * X).trace();
        case NonlinearityKind::pucci_plus: return parastep::pucci_plus(X, pucci_lambda_, pucci_Lambda_);
        case NonlinearityKind::pucci_minus: return parastep::pucci_minus(X, pucci_lambda_, pucci_Lambda_);
        case NonlinearityKind::bellman_isaacs: {
            double outer = std::numeric_limits<double>::infinity();
            for (const auto& group : family_) {
                double inner = -std::numeric_limits<double>::infinity();
                for (const Matrix& A : group) inner = std::max(inner, (A * X).trace());
                outer = std::min(outer, inner);
            }
            return outer;
        }
        case NonlinearityKind::custom: return (*custom_)(X);
    }
    return 0.0;
}

double evaluate_F(const NonlinearityDescriptor& F, const Matrix& X) { return F(X); }

EllipticityReport verify_uniform_ellipticity(const NonlinearityDescriptor& F, int trials,
                                             double probe_magnitude, std::uint64_t seed,
                                             double tolerance) {
    if (trials < 1) throw Error("trials must be at least 1");
    const auto n = static_cast<Eigen::Index>(F.dim());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> rank_dist(0, static_cast<int>(n));

    EllipticityReport rep;
    rep.trials = trials;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = -std::numeric_limits<double>::infinity();
    const auto [lam, Lam] = F.constants();

    for (int k = 0; k < trials; ++k) {
        Matrix X(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c <= r; ++c) X(r, c) = X(c, r) = probe_magnitude * unif(rng);
        // Every tenth probe uses Y = 0; the rest a random rank in 1..n.
        const int rank = (k % 10 == 0) ? 0 : std::max(1, rank_dist(rng));
        Matrix B = Matrix::Zero(n, std::max(rank, 1));
        for (int c = 0; c < rank; ++c)
            for (Eigen::Index r = 0; r < n; ++r) B(r, c) = probe_magnitude * unif(rng);
        const Matrix Y = B * B.transpose();

        const double f0 = F(X);
        const double diff = F(Matrix(X + Y)) - f0;
        const double ny = rank == 0 ? 0.0 : spectral_norm(Y);
        const double slack = tolerance * (1.0 + std::abs(f0) + ny);
        if (diff < lam * ny - slack || diff > Lam * ny + slack) ++rep.violations;
        if (ny > 0.0) {
            rep.min_ratio = std::min(rep.min_ratio, diff / ny);
            rep.max_ratio = std::max(rep.max_ratio, diff / ny);
        }
    }
    if (!std::isfinite(rep.min_ratio)) rep.min_ratio = rep.max_ratio = 0.0;
    rep.pass = rep.violations == 0;
    return rep;
}

}  // namespace parastep
