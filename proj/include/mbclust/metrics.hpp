#pragma once

#include "mbclust/covariance.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mbclust {

using LabelVector = std::vector<int>;

struct MetricReport {
    double ari = 0.0;
    double nmi = 0.0;
    std::optional<int> ci;  // only when both sides expose k centers
};

/// Adjusted Rand index (pair counting). 1 for identical partitions.
/// Throws InvalidParameter on length mismatch or negative labels.
double ari(std::span<const int> a, std::span<const int> b);

/// Mutual information normalized by the arithmetic mean of the two
/// entropies. 1 when both partitions are constant.
double nmi(std::span<const int> a, std::span<const int> b);

/// Centroid index: nearest-neighbour mapping in both directions, counting
/// centers that receive no mapping; the larger of the two orphan counts.
int centroid_index(const Matrix& centers_a, const Matrix& centers_b);

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and tied magnitudes get averaged ranks. Up to
/// kWilcoxonExactLimit nonzero pairs the p-value comes from the exact
/// permutation distribution; above it from the normal approximation with
/// continuity and tie corrections. Throws InsufficientData with fewer than
/// five nonzero differences.
double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Normal-approximation p-value, regardless of sample size.
double wilcoxon_signed_rank_normal(std::span<const double> x, std::span<const double> y);

}  // namespace mbclust
