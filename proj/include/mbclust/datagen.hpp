#pragma once

#include "mbclust/covariance.hpp"
#include "mbclust/gmm.hpp"
#include "mbclust/metrics.hpp"
#include "mbclust/random.hpp"

#include <cstdint>

namespace mbclust {

struct DatasetSpec {
    Index k = 3;
    Index d = 2;
    double c = 0.01;           // target minimum pairwise separation index
    Index n = 0;               // 0 means 100 k
    double eig_min = 1.0;      // covariance eigenvalues ~ Uniform(eig_min, eig_max)
    double eig_max = 200.0;
    double alpha = 0.05;       // tail mass of the quantile intervals
    std::uint64_t seed = 1;

    Index samples() const noexcept { return n > 0 ? n : 100 * k; }
    /// Throws InvalidParameter when out of range.
    void validate() const;
};

struct GroundTruth {
    LabelVector labels;
    MixtureSolution mixture;   // planted weights, means and covariances
};

struct GeneratedDataset {
    Matrix data;
    GroundTruth truth;
    double separation = 0.0;   // achieved minimum pairwise index (NaN for k = 1)
};

/// Quantile-gap separation of two Gaussians projected on the direction
/// joining their means: -1 when the means coincide, 0 when the (1 - alpha/2)
/// quantile intervals touch, approaching 1 as they move apart.
double separation_index(const Vector& mu1, const SymMatrix& cov1, const Vector& mu2, const SymMatrix& cov2,
                        double alpha = 0.05);

/// Smallest separation_index over all component pairs of `mixture`.
double min_pairwise_separation(const MixtureSolution& mixture, double alpha = 0.05);

/// Draws a labelled Gaussian mixture sample whose minimum pairwise
/// separation index is within 0.01 of spec.c. Throws GenerationFailure when
/// the radial bisection cannot reach the target.
GeneratedDataset generate(const DatasetSpec& spec, Rng& rng);

/// Same, seeded from spec.seed.
GeneratedDataset generate(const DatasetSpec& spec);

}  // namespace mbclust
