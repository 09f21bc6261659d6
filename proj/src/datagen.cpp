#include "mbclust/datagen.hpp"

#include "mbclust/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>

namespace mbclust {

namespace {

Matrix random_orthonormal(Index d, Rng& rng) {
    Matrix gaussian(d, d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) gaussian(i, j) = standard_normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(gaussian);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

double min_separation_scaled(const std::vector<Vector>& means, const std::vector<SymMatrix>& covs, double scale,
                             double alpha) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < means.size(); ++a) {
        for (std::size_t b = a + 1; b < means.size(); ++b) {
            worst = std::min(worst, separation_index(scale * means[a], covs[a], scale * means[b], covs[b], alpha));
        }
    }
    return worst;
}

}  // namespace

void DatasetSpec::validate() const {
    if (k < 1 || d < 1) throw InvalidParameter("dataset spec needs k >= 1 and d >= 1");
    if (samples() < k) throw InvalidParameter("dataset spec needs n >= k");
    if (!(eig_min > 0.0 && eig_max >= eig_min)) throw InvalidParameter("eigenvalue range must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
    if (!(c > -1.0 && c < 1.0)) throw InvalidParameter("separation target must lie in (-1, 1)");
}

double separation_index(const Vector& mu1, const SymMatrix& cov1, const Vector& mu2, const SymMatrix& cov2,
                        double alpha) {
    if (mu1.size() != mu2.size() || cov1.rows() != mu1.size() || cov2.rows() != mu2.size()) {
        throw InvalidParameter("separation_index: dimension mismatch");
    }
    const Vector diff = mu2 - mu1;
    const double gap = diff.norm();
    if (gap == 0.0) return -1.0;
    const Vector direction = diff / gap;
    const double s1 = std::sqrt(direction.dot(cov1 * direction));
    const double s2 = std::sqrt(direction.dot(cov2 * direction));
    const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
    // projected means: m1 = 0, m2 = gap
    const double lower_gap = (gap - z * s2) - z * s1;
    const double upper_gap = (gap + z * s2) + z * s1;
    return lower_gap / upper_gap;
}

double min_pairwise_separation(const MixtureSolution& mixture, double alpha) {
    return min_separation_scaled(mixture.means, mixture.covariances, 1.0, alpha);
}

GeneratedDataset generate(const DatasetSpec& spec, Rng& rng) {
    spec.validate();
    const Index k = spec.k;
    const Index d = spec.d;
    const Index n = spec.samples();

    std::vector<SymMatrix> covs;
    covs.reserve(k);
    for (Index j = 0; j < k; ++j) {
        Vector eig(d);
        for (Index i = 0; i < d; ++i) eig(i) = uniform_real(rng, spec.eig_min, spec.eig_max);
        const Matrix q = random_orthonormal(d, rng);
        SymMatrix cov = q * eig.asDiagonal() * q.transpose();
        covs.push_back(0.5 * (cov + cov.transpose()));
    }

    std::vector<Vector> means;
    means.reserve(k);
    const double spread = std::sqrt(static_cast<double>(d));
    for (Index j = 0; j < k; ++j) {
        Vector mu(d);
        for (Index i = 0; i < d; ++i) mu(i) = spread * standard_normal(rng);
        means.push_back(std::move(mu));
    }

    double achieved = std::numeric_limits<double>::quiet_NaN();
    if (k > 1) {
        constexpr double kTolerance = 0.01;
        double lo = 1e-3;
        double hi = 1e3;
        const double at_lo = min_separation_scaled(means, covs, lo, spec.alpha);
        const double at_hi = min_separation_scaled(means, covs, hi, spec.alpha);
        if (at_lo > spec.c + kTolerance || at_hi < spec.c - kTolerance) {
            throw GenerationFailure("separation target is outside the reachable range");
        }
        double scale = hi;
        achieved = at_hi;
        for (int iteration = 0; iteration < 100; ++iteration) {
            scale = 0.5 * (lo + hi);
            achieved = min_separation_scaled(means, covs, scale, spec.alpha);
            if (std::abs(achieved - spec.c) <= 1e-6) break;
            if (achieved < spec.c) {
                lo = scale;
            } else {
                hi = scale;
            }
        }
        if (!(std::abs(achieved - spec.c) <= kTolerance)) {
            throw GenerationFailure("bisection did not reach the separation target");
        }
        for (auto& mu : means) mu *= scale;
    }

    std::vector<Index> sizes(static_cast<std::size_t>(k), n / k);
    for (Index j = 0; j < n % k; ++j) ++sizes[static_cast<std::size_t>(j)];

    Matrix ordered(n, d);
    LabelVector ordered_labels;
    ordered_labels.reserve(static_cast<std::size_t>(n));
    Index row = 0;
    for (Index j = 0; j < k; ++j) {
        const CholeskyFactor chol = cholesky(covs[static_cast<std::size_t>(j)]);
        for (Index s = 0; s < sizes[static_cast<std::size_t>(j)]; ++s, ++row) {
            Vector z(d);
            for (Index i = 0; i < d; ++i) z(i) = standard_normal(rng);
            ordered.row(row) = (means[static_cast<std::size_t>(j)] + chol.lower() * z).transpose();
            ordered_labels.push_back(static_cast<int>(j));
        }
    }

    std::vector<Index> permutation(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) permutation[static_cast<std::size_t>(i)] = i;
    shuffle(rng, permutation);

    GeneratedDataset out;
    out.data.resize(n, d);
    out.truth.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Index src = permutation[static_cast<std::size_t>(i)];
        out.data.row(i) = ordered.row(src);
        out.truth.labels[static_cast<std::size_t>(i)] = ordered_labels[static_cast<std::size_t>(src)];
    }
    Vector weights(k);
    for (Index j = 0; j < k; ++j) weights(j) = static_cast<double>(sizes[static_cast<std::size_t>(j)]) / static_cast<double>(n);
    out.truth.mixture = MixtureSolution::from_parameters(std::move(weights), std::move(means), std::move(covs));
    out.separation = achieved;
    return out;
}

GeneratedDataset generate(const DatasetSpec& spec) {
    Rng rng(spec.seed);
    return generate(spec, rng);
}

}  // namespace mbclust
