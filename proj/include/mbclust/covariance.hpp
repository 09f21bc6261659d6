#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace mbclust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Symmetric d x d matrix. Symmetry is an invariant maintained by the producers
// in this module, not enforced by the type.
using SymMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kDefaultShrunkDelta = 0.1;

/// Lower-triangular factor L of a positive definite matrix with L Lᵀ = Σ,
/// together with the cached log-determinant of Σ.
class CholeskyFactor {
public:
    /// Throws NotPositiveDefinite when `cov` has no Cholesky factorization.
    static CholeskyFactor factor(const SymMatrix& cov);

    const Matrix& lower() const noexcept { return lower_; }
    double log_det() const noexcept { return log_det_; }
    Index dim() const noexcept { return lower_.rows(); }

    /// L Lᵀ, the factored matrix.
    SymMatrix reconstruct() const { return lower_ * lower_.transpose(); }

    /// Solves L y = v.
    Vector solve_lower(const Eigen::Ref<const Vector>& v) const;

private:
    CholeskyFactor(Matrix lower, double log_det) : lower_(std::move(lower)), log_det_(log_det) {}

    Matrix lower_;
    double log_det_ = 0.0;
};

/// Covariance post-processing applied after each empirical estimate.
class RegularizationMethod {
public:
    enum class Kind { Empirical, Shrunk, LedoitWolf, Oas };

    static RegularizationMethod empirical() { return RegularizationMethod(Kind::Empirical, 0.0); }
    /// Throws InvalidParameter for delta outside [0, 1].
    static RegularizationMethod shrunk(double delta = kDefaultShrunkDelta);
    static RegularizationMethod ledoit_wolf() { return RegularizationMethod(Kind::LedoitWolf, 0.0); }
    static RegularizationMethod oas() { return RegularizationMethod(Kind::Oas, 0.0); }

    /// Accepts "empirical", "shrunk", "shrunk:<delta>", "ledoitwolf" (or "lw") and "oas".
    static RegularizationMethod parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    /// Fixed intensity; meaningful for Kind::Shrunk only.
    double delta() const noexcept { return delta_; }

    /// Canonical lower-case tag, e.g. "shrunk" or "shrunk:0.25".
    std::string name() const;

    friend bool operator==(const RegularizationMethod&, const RegularizationMethod&) = default;

private:
    RegularizationMethod(Kind kind, double delta) : kind_(kind), delta_(delta) {}

    Kind kind_;
    double delta_;
};

struct WeightedMoments {
    Vector mean;
    SymMatrix cov;
    double n_eff = 0.0;  // sum of the weights
};

/// Weighted mean and (biased) weighted covariance of the rows of `data`.
/// Throws DegenerateCluster when the weights sum to zero.
WeightedMoments weighted_moments(const Matrix& data, const Vector& weights);

/// (1 - delta) Σ + delta (tr Σ / d) I.
SymMatrix shrink(const SymMatrix& cov, double delta);

/// Oracle approximating shrinkage intensity, with n taken as the effective
/// sample size. A zero matrix yields 1.
double oas_delta(const SymMatrix& cov, double n_eff, Index d);

/// Ledoit-Wolf intensity for weighted samples. Frobenius products are
/// normalized by d; returns 0 when Σ is already a multiple of the identity.
double lw_delta(const Matrix& data, const Vector& weights, const Vector& mean, const SymMatrix& cov);

/// Applies `method` to an empirical covariance. Flooring is left to
/// cholesky_with_floor.
SymMatrix regularize(const SymMatrix& cov, const RegularizationMethod& method, const Matrix& data,
                     const Vector& weights, const Vector& mean);

/// Throws NotPositiveDefinite on failure.
CholeskyFactor cholesky(const SymMatrix& cov);

struct FlooredFactor {
    SymMatrix cov;         // matrix actually factored (input plus jitter * I)
    CholeskyFactor chol;
    double jitter = 0.0;   // 0 when the input factored as-is
};

/// Factorizes `cov`, retrying with cov + eps I for
/// eps = 1e-6 max(1, tr Σ / d) doubled up to three times.
/// Throws DegenerateCluster if every attempt fails.
FlooredFactor cholesky_with_floor(const SymMatrix& cov);

/// log N(x | mean, L Lᵀ).
double log_density(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                   const CholeskyFactor& chol);

/// log N(x_i | mean, L Lᵀ) for every row x_i of `data`.
Vector log_density_rows(const Matrix& data, const Vector& mean, const CholeskyFactor& chol);

/// sqrt((x - mean)ᵀ Σ⁻¹ (x - mean)).
double mahalanobis(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                   const CholeskyFactor& chol);

}  // namespace mbclust
