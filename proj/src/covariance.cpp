#include "mbclust/covariance.hpp"

#include "mbclust/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mbclust {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

SymMatrix symmetrized(const SymMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

CholeskyFactor CholeskyFactor::factor(const SymMatrix& cov) {
    if (cov.rows() == 0 || cov.rows() != cov.cols()) {
        throw InvalidParameter("cholesky: expected a non-empty square matrix");
    }
    if (!cov.allFinite()) {
        throw NotPositiveDefinite("cholesky: matrix has non-finite entries");
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cholesky: matrix is not positive definite");
    }
    Matrix lower = llt.matrixL();
    const auto diag = lower.diagonal();
    if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
        throw NotPositiveDefinite("cholesky: non-positive pivot");
    }
    const double log_det = 2.0 * diag.array().log().sum();
    if (!std::isfinite(log_det)) {
        throw NotPositiveDefinite("cholesky: log-determinant is not finite");
    }
    return CholeskyFactor(std::move(lower), log_det);
}

Vector CholeskyFactor::solve_lower(const Eigen::Ref<const Vector>& v) const {
    return lower_.triangularView<Eigen::Lower>().solve(v);
}

RegularizationMethod RegularizationMethod::shrunk(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw InvalidParameter("shrinkage intensity must lie in [0, 1]");
    }
    return RegularizationMethod(Kind::Shrunk, delta);
}

RegularizationMethod RegularizationMethod::parse(std::string_view text) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "empirical" || lowered == "none") return empirical();
    if (lowered == "shrunk") return shrunk();
    if (lowered == "ledoitwolf" || lowered == "ledoit_wolf" || lowered == "lw") return ledoit_wolf();
    if (lowered == "oas") return oas();
    constexpr std::string_view prefix = "shrunk:";
    if (lowered.starts_with(prefix)) {
        const std::string value = lowered.substr(prefix.size());
        double delta = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), delta);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            throw InvalidParameter("bad shrinkage intensity in '" + std::string(text) + "'");
        }
        return shrunk(delta);
    }
    throw InvalidParameter("unknown regularizer '" + std::string(text) + "'");
}

std::string RegularizationMethod::name() const {
    switch (kind_) {
        case Kind::Empirical:
            return "empirical";
        case Kind::Shrunk: {
            if (delta_ == kDefaultShrunkDelta) return "shrunk";
            std::ostringstream out;
            out << "shrunk:" << delta_;
            return out.str();
        }
        case Kind::LedoitWolf:
            return "ledoitwolf";
        case Kind::Oas:
            return "oas";
    }
    return "unknown";
}

WeightedMoments weighted_moments(const Matrix& data, const Vector& weights) {
    if (weights.size() != data.rows()) {
        throw InvalidParameter("weighted_moments: weight count does not match sample count");
    }
    if (!weights.allFinite() || (weights.array() < 0.0).any()) {
        throw InvalidParameter("weighted_moments: weights must be finite and nonnegative");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw DegenerateCluster("weighted_moments: total weight is zero");
    }
    WeightedMoments out;
    out.n_eff = total;
    out.mean = (data.transpose() * weights) / total;
    const Matrix centered = data.rowwise() - out.mean.transpose();
    out.cov = symmetrized((centered.transpose() * weights.asDiagonal() * centered) / total);
    return out;
}

SymMatrix shrink(const SymMatrix& cov, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw InvalidParameter("shrink: delta must lie in [0, 1]");
    }
    const Index d = cov.rows();
    const double target = cov.trace() / static_cast<double>(d);
    SymMatrix out = (1.0 - delta) * cov;
    out.diagonal().array() += delta * target;
    // keep the trace exact: the diagonal shift above can drift by an ulp
    const double drift = out.trace() - cov.trace();
    out.diagonal().array() -= drift / static_cast<double>(d);
    return symmetrized(out);
}

double oas_delta(const SymMatrix& cov, double n_eff, Index d) {
    if (d < 1 || cov.rows() != d) {
        throw InvalidParameter("oas_delta: dimension mismatch");
    }
    const double dd = static_cast<double>(d);
    const double tr = cov.trace();
    const double tr_sq = cov.squaredNorm();  // tr(Σ²) for symmetric Σ
    const double numerator = (1.0 - 2.0 / dd) * tr_sq + tr * tr;
    const double denominator = (n_eff + 1.0 - 2.0 / dd) * (tr_sq + tr * tr / dd);
    if (denominator <= 0.0) return 1.0;
    return std::clamp(numerator / denominator, 0.0, 1.0);
}

double lw_delta(const Matrix& data, const Vector& weights, const Vector& mean, const SymMatrix& cov) {
    const Index d = cov.rows();
    if (data.cols() != d || mean.size() != d || weights.size() != data.rows()) {
        throw InvalidParameter("lw_delta: dimension mismatch");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw DegenerateCluster("lw_delta: total weight is zero");
    }
    const double dd = static_cast<double>(d);
    const double n_eff = total;
    const double m = cov.trace() / dd;
    SymMatrix dispersion = cov;
    dispersion.diagonal().array() -= m;
    const double v2 = dispersion.squaredNorm() / dd;
    if (v2 <= 0.0) return 0.0;

    // ‖z zᵀ − Σ‖²_F = ‖z‖⁴ − 2 zᵀΣz + ‖Σ‖²_F
    const double cov_norm2 = cov.squaredNorm();
    double accum = 0.0;
    for (Index i = 0; i < data.rows(); ++i) {
        const double w = n_eff * weights(i) / total;
        if (w == 0.0) continue;
        const Vector z = data.row(i).transpose() - mean;
        const double zz = z.squaredNorm();
        const double dist2 = zz * zz - 2.0 * z.dot(cov * z) + cov_norm2;
        accum += w * std::max(dist2, 0.0);
    }
    const double b2_bar = accum / dd / (n_eff * n_eff);
    const double b2 = std::min(b2_bar, v2);
    return std::clamp(b2 / v2, 0.0, 1.0);
}

SymMatrix regularize(const SymMatrix& cov, const RegularizationMethod& method, const Matrix& data,
                     const Vector& weights, const Vector& mean) {
    if (cov.rows() != cov.cols() || data.cols() != cov.rows() || mean.size() != cov.rows()) {
        throw InvalidParameter("regularize: dimension mismatch");
    }
    switch (method.kind()) {
        case RegularizationMethod::Kind::Empirical:
            return cov;
        case RegularizationMethod::Kind::Shrunk:
            return shrink(cov, method.delta());
        case RegularizationMethod::Kind::LedoitWolf:
            return shrink(cov, lw_delta(data, weights, mean, cov));
        case RegularizationMethod::Kind::Oas:
            return shrink(cov, oas_delta(cov, weights.sum(), cov.rows()));
    }
    return cov;
}

CholeskyFactor cholesky(const SymMatrix& cov) { return CholeskyFactor::factor(cov); }

FlooredFactor cholesky_with_floor(const SymMatrix& cov) {
    try {
        return FlooredFactor{cov, CholeskyFactor::factor(cov), 0.0};
    } catch (const NotPositiveDefinite&) {
    }
    const double d = static_cast<double>(cov.rows());
    const double scale = std::isfinite(cov.trace()) ? std::max(1.0, cov.trace() / d) : 1.0;
    double eps = 1e-6 * scale;
    for (int attempt = 0; attempt <= 3; ++attempt, eps *= 2.0) {
        SymMatrix floored = cov;
        floored.diagonal().array() += eps;
        try {
            CholeskyFactor chol = CholeskyFactor::factor(floored);
            return FlooredFactor{std::move(floored), std::move(chol), eps};
        } catch (const NotPositiveDefinite&) {
        }
    }
    throw DegenerateCluster("covariance is not positive definite even after eigenvalue flooring");
}

double log_density(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                   const CholeskyFactor& chol) {
    const Vector diff = x - mean;
    const double quad = chol.solve_lower(diff).squaredNorm();
    const double d = static_cast<double>(chol.dim());
    return -0.5 * (d * kLogTwoPi + chol.log_det() + quad);
}

Vector log_density_rows(const Matrix& data, const Vector& mean, const CholeskyFactor& chol) {
    Matrix centered = (data.rowwise() - mean.transpose()).transpose();  // d x n
    chol.lower().triangularView<Eigen::Lower>().solveInPlace(centered);
    const double d = static_cast<double>(chol.dim());
    const double constant = -0.5 * (d * kLogTwoPi + chol.log_det());
    return (constant - 0.5 * centered.colwise().squaredNorm().array()).matrix().transpose();
}

double mahalanobis(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                   const CholeskyFactor& chol) {
    const Vector diff = x - mean;
    return chol.solve_lower(diff).norm();
}

}  // namespace mbclust
