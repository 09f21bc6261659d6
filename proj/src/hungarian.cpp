#include "mbclust/hungarian.hpp"

#include "mbclust/errors.hpp"

#include <limits>

namespace mbclust {

std::vector<int> hungarian(const Matrix& costs) {
    if (costs.rows() != costs.cols()) throw InvalidParameter("hungarian: cost matrix must be square");
    if (!costs.allFinite()) throw InvalidParameter("hungarian: cost matrix must be finite");
    const Index n = costs.rows();
    if (n == 0) return {};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based rows/columns; column 0 is a virtual sentinel.
    std::vector<double> row_potential(n + 1, 0.0), col_potential(n + 1, 0.0);
    std::vector<Index> match(n + 1, 0), way(n + 1, 0);

    for (Index row = 1; row <= n; ++row) {
        match[0] = row;
        Index col0 = 0;
        std::vector<double> slack(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[col0] = 1;
            const Index row0 = match[col0];
            double delta = kInf;
            Index col1 = 0;
            for (Index col = 1; col <= n; ++col) {
                if (used[col]) continue;
                const double reduced = costs(row0 - 1, col - 1) - row_potential[row0] - col_potential[col];
                if (reduced < slack[col]) {
                    slack[col] = reduced;
                    way[col] = col0;
                }
                if (slack[col] < delta) {
                    delta = slack[col];
                    col1 = col;
                }
            }
            for (Index col = 0; col <= n; ++col) {
                if (used[col]) {
                    row_potential[match[col]] += delta;
                    col_potential[col] -= delta;
                } else {
                    slack[col] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const Index col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    for (Index col = 1; col <= n; ++col) {
        assignment[static_cast<std::size_t>(match[col] - 1)] = static_cast<int>(col - 1);
    }
    return assignment;
}

double assignment_cost(const Matrix& costs, const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) total += costs(static_cast<Index>(i), assignment[i]);
    return total;
}

}  // namespace mbclust
