#pragma once

#include "mbclust/covariance.hpp"
#include "mbclust/gmm.hpp"
#include "mbclust/random.hpp"

#include <vector>

namespace mbclust {

/// k centers (one per row) and the sum of squared distances from every
/// sample to its nearest center.
struct CentroidSolution {
    Matrix centers;
    double sse = 0.0;

    Index k() const noexcept { return centers.rows(); }
    Index d() const noexcept { return centers.cols(); }
};

/// k distinct sample rows, drawn uniformly without replacement.
Matrix init_random_centers(const Matrix& data, Index k, Rng& rng);

/// Index of the nearest center for every row (ties to the lowest index).
std::vector<int> nearest_center(const Matrix& data, const Matrix& centers);

/// Sum of squared Euclidean distances to the nearest center.
double sum_of_squares(const Matrix& data, const Matrix& centers);

/// Lloyd iterations from `init_centers` until |Δ sse| < config.tolerance or
/// config.max_iterations. Empty clusters are moved onto the sample farthest
/// from its current center.
CentroidSolution lloyd_fit(const Matrix& data, const Matrix& init_centers, const FitConfig& config,
                           std::vector<double>* sse_trace = nullptr);

}  // namespace mbclust
