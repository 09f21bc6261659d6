#include "mbclust/kmeans.hpp"

#include "mbclust/errors.hpp"

#include <limits>

namespace mbclust {

namespace {

struct Assignment {
    std::vector<int> labels;
    Vector distance2;  // squared distance of each sample to its center
};

Assignment assign(const Matrix& data, const Matrix& centers) {
    const Index n = data.rows();
    Assignment out{std::vector<int>(static_cast<std::size_t>(n), 0), Vector(n)};
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int label = 0;
        for (Index j = 0; j < centers.rows(); ++j) {
            const double dist = (data.row(i) - centers.row(j)).squaredNorm();
            if (dist < best) {
                best = dist;
                label = static_cast<int>(j);
            }
        }
        out.labels[static_cast<std::size_t>(i)] = label;
        out.distance2(i) = best;
    }
    return out;
}

}  // namespace

Matrix init_random_centers(const Matrix& data, Index k, Rng& rng) {
    if (k < 1 || k > data.rows()) {
        throw InvalidParameter("init_random_centers: need 1 <= k <= n");
    }
    const auto picks = sample_without_replacement(rng, static_cast<std::size_t>(data.rows()), static_cast<std::size_t>(k));
    Matrix centers(k, data.cols());
    for (Index j = 0; j < k; ++j) centers.row(j) = data.row(static_cast<Index>(picks[static_cast<std::size_t>(j)]));
    return centers;
}

std::vector<int> nearest_center(const Matrix& data, const Matrix& centers) { return assign(data, centers).labels; }

double sum_of_squares(const Matrix& data, const Matrix& centers) { return assign(data, centers).distance2.sum(); }

CentroidSolution lloyd_fit(const Matrix& data, const Matrix& init_centers, const FitConfig& config,
                           std::vector<double>* sse_trace) {
    config.validate();
    const Index n = data.rows();
    const Index k = init_centers.rows();
    if (k < 1 || k > n) throw InvalidParameter("lloyd_fit: need 1 <= k <= n");
    if (init_centers.cols() != data.cols()) throw InvalidParameter("lloyd_fit: center dimension mismatch");

    CentroidSolution current{init_centers, 0.0};
    Assignment assignment = assign(data, current.centers);
    current.sse = assignment.distance2.sum();
    if (sse_trace != nullptr) sse_trace->push_back(current.sse);

    for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
        Matrix sums = Matrix::Zero(k, data.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const int label = assignment.labels[static_cast<std::size_t>(i)];
            sums.row(label) += data.row(i);
            ++counts[static_cast<std::size_t>(label)];
        }
        Matrix centers = current.centers;
        for (Index j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) {
                centers.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
            }
        }
        for (Index j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) continue;
            Index farthest = 0;
            assignment.distance2.maxCoeff(&farthest);
            centers.row(j) = data.row(farthest);
            assignment.distance2(farthest) = 0.0;  // do not pick the same sample twice
        }

        const double previous = current.sse;
        current.centers = std::move(centers);
        assignment = assign(data, current.centers);
        current.sse = assignment.distance2.sum();
        if (sse_trace != nullptr) sse_trace->push_back(current.sse);
        if (std::abs(previous - current.sse) < config.tolerance) break;
    }
    return current;
}

}  // namespace mbclust
