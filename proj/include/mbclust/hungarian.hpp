#pragma once

#include "mbclust/covariance.hpp"

#include <vector>

namespace mbclust {

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials, O(k³)). Entry i of the result is the column matched to row i.
/// Throws InvalidParameter for non-square or non-finite input.
std::vector<int> hungarian(const Matrix& costs);

/// Σ_i costs(i, assignment[i]).
double assignment_cost(const Matrix& costs, const std::vector<int>& assignment);

}  // namespace mbclust
