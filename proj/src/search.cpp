#include "mbclust/search.hpp"

#include "mbclust/hungarian.hpp"

namespace mbclust {

namespace {

void check_compatible(const MixtureSolution& p1, const MixtureSolution& p2) {
    if (p1.k() != p2.k() || p1.d() != p2.d()) {
        throw InvalidParameter("crossover: parents differ in k or d");
    }
}

SymMatrix average_other_covariances(const MixtureSolution& solution, Index skip) {
    SymMatrix sum = SymMatrix::Zero(solution.d(), solution.d());
    for (Index c = 0; c < solution.k(); ++c) {
        if (c != skip) sum += solution.covariances[c];
    }
    return sum / static_cast<double>(solution.k() - 1);
}

}  // namespace

void SearchConfig::validate() const {
    if (n_it < 0) throw InvalidParameter("n_it must be nonnegative");
    if (pi_min < 1 || pi_max < pi_min) throw InvalidParameter("population bounds need 1 <= pi_min <= pi_max");
}

Matrix crossover_costs(const MixtureSolution& p1, const MixtureSolution& p2) {
    check_compatible(p1, p2);
    const Index k = p1.k();
    Matrix costs(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            costs(i, j) = 0.5 * (mahalanobis(p1.means[i], p2.means[j], p2.chol[j]) +
                                 mahalanobis(p2.means[j], p1.means[i], p1.chol[i]));
        }
    }
    return costs;
}

std::vector<int> match_components(const MixtureSolution& p1, const MixtureSolution& p2) {
    return hungarian(crossover_costs(p1, p2));
}

MixtureSolution crossover(const MixtureSolution& p1, const MixtureSolution& p2, const Matrix& data, Rng& rng) {
    const std::vector<int> matching = match_components(p1, p2);
    MixtureSolution child;
    const Index k = p1.k();
    child.weights.resize(k);
    child.means.reserve(k);
    child.covariances.reserve(k);
    child.chol.reserve(k);
    for (Index i = 0; i < k; ++i) {
        const Index j = matching[static_cast<std::size_t>(i)];
        const bool from_first = coin_flip(rng);
        const MixtureSolution& donor = from_first ? p1 : p2;
        const Index c = from_first ? i : j;
        child.means.push_back(donor.means[c]);
        child.covariances.push_back(donor.covariances[c]);
        child.chol.push_back(donor.chol[c]);
        child.weights(i) = 0.5 * (p1.weights(i) + p2.weights(j));
    }
    child.weights /= child.weights.sum();
    child.fitness = e_step(data, child).loglik;
    return child;
}

MixtureSolution mutate(const MixtureSolution& solution, const Matrix& data, Rng& rng) {
    if (solution.k() < 2) return solution;
    if (data.cols() != solution.d()) throw InvalidParameter("mutate: dimension mismatch");
    const Index j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(solution.k())));
    const Index i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(data.rows())));
    MixtureSolution out = solution;
    out.means[j] = data.row(i).transpose();
    FlooredFactor floored = cholesky_with_floor(average_other_covariances(solution, j));
    out.covariances[j] = std::move(floored.cov);
    out.chol[j] = std::move(floored.chol);
    out.fitness = std::numeric_limits<double>::quiet_NaN();
    return out;
}

MixtureSolution swap_component(const MixtureSolution& solution, const Matrix& data, Rng& rng) {
    if (data.cols() != solution.d()) throw InvalidParameter("swap_component: dimension mismatch");
    const Index j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(solution.k())));
    const Index i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(data.rows())));
    MixtureSolution out = solution;
    out.means[j] = data.row(i).transpose();
    out.fitness = std::numeric_limits<double>::quiet_NaN();
    return out;
}

Matrix center_costs(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidParameter("crossover: parents differ in k or d");
    }
    Matrix costs(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) costs(i, j) = (a.row(i) - b.row(j)).norm();
    }
    return costs;
}

CentroidSolution crossover(const CentroidSolution& p1, const CentroidSolution& p2, const Matrix& data, Rng& rng) {
    const std::vector<int> matching = hungarian(center_costs(p1.centers, p2.centers));
    Matrix centers(p1.k(), p1.d());
    for (Index i = 0; i < p1.k(); ++i) {
        centers.row(i) = coin_flip(rng) ? p1.centers.row(i) : p2.centers.row(matching[static_cast<std::size_t>(i)]);
    }
    const double sse = sum_of_squares(data, centers);
    return CentroidSolution{std::move(centers), sse};
}

CentroidSolution mutate(const CentroidSolution& solution, const Matrix& data, Rng& rng) {
    if (data.cols() != solution.d()) throw InvalidParameter("mutate: dimension mismatch");
    const Index j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(solution.k())));
    const Index i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(data.rows())));
    CentroidSolution out = solution;
    out.centers.row(j) = data.row(i);
    out.sse = sum_of_squares(data, out.centers);
    return out;
}

}  // namespace mbclust
