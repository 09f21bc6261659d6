#include "mbclust/gmm.hpp"

#include "mbclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace mbclust {

namespace {

void check_dims(const Matrix& data, const MixtureSolution& solution) {
    if (solution.k() == 0 || static_cast<Index>(solution.means.size()) != solution.k() ||
        static_cast<Index>(solution.chol.size()) != solution.k()) {
        throw InvalidParameter("mixture solution is incomplete");
    }
    if (solution.d() != data.cols()) {
        throw InvalidParameter("mixture dimension does not match the data");
    }
}

// n x k matrix of log(pi_j) + log N(x_i | mu_j, Sigma_j).
Matrix joint_log_density(const Matrix& data, const MixtureSolution& solution) {
    Matrix out(data.rows(), solution.k());
    for (Index j = 0; j < solution.k(); ++j) {
        const double log_weight = solution.weights(j) > 0.0 ? std::log(solution.weights(j))
                                                            : -std::numeric_limits<double>::infinity();
        out.col(j) = log_density_rows(data, solution.means[j], solution.chol[j]).array() + log_weight;
    }
    return out;
}

// Row-wise log-sum-exp.
Vector log_sum_exp_rows(const Matrix& values) {
    Vector out(values.rows());
    for (Index i = 0; i < values.rows(); ++i) {
        const double peak = values.row(i).maxCoeff();
        if (!std::isfinite(peak)) {
            out(i) = peak;
            continue;
        }
        out(i) = peak + std::log((values.row(i).array() - peak).exp().sum());
    }
    return out;
}

struct MStepOutcome {
    MixtureSolution solution;
    EStepResult next;
};

MStepOutcome m_step_impl(const Matrix& data, const Responsibilities& resp, const RegularizationMethod& method,
                         EmTrace* trace) {
    const Matrix& gamma = resp.gamma;
    const Index n = data.rows();
    const Index k = gamma.cols();
    if (gamma.rows() != n || k == 0) {
        throw InvalidParameter("m_step: responsibilities do not match the data");
    }
    if (k > n) {
        throw InvalidParameter("m_step: more components than samples");
    }

    const Vector mass = gamma.colwise().sum().transpose();
    const double threshold = 1e-10 * static_cast<double>(n);
    const double total_mass = mass.sum();

    MixtureSolution out;
    out.weights = Vector::Zero(k);
    out.means.assign(k, Vector());
    out.covariances.assign(k, SymMatrix());
    std::vector<std::optional<CholeskyFactor>> factors(k);
    std::vector<Index> degenerate;

    for (Index j = 0; j < k; ++j) {
        if (!(mass(j) >= threshold)) {
            degenerate.push_back(j);
            continue;
        }
        const Vector weights = gamma.col(j);
        WeightedMoments moments = weighted_moments(data, weights);
        const SymMatrix regularized = regularize(moments.cov, method, data, weights, moments.mean);
        FlooredFactor floored = cholesky_with_floor(regularized);
        if (trace != nullptr && floored.jitter > 0.0) ++trace->floor_activations;
        out.weights(j) = mass(j) / total_mass;
        out.means[j] = std::move(moments.mean);
        out.covariances[j] = std::move(floored.cov);
        factors[j] = std::move(floored.chol);
    }

    if (static_cast<Index>(degenerate.size()) == k) {
        throw DegenerateCluster("m_step: every component lost its support");
    }

    if (!degenerate.empty()) {
        // Relocate each empty component onto the worst-explained samples of
        // the surviving mixture, with the average surviving covariance.
        Vector log_mix = Vector::Constant(n, -std::numeric_limits<double>::infinity());
        SymMatrix mean_cov = SymMatrix::Zero(data.cols(), data.cols());
        Index healthy = 0;
        {
            Matrix joint(n, k - static_cast<Index>(degenerate.size()));
            Index col = 0;
            for (Index j = 0; j < k; ++j) {
                if (!factors[j]) continue;
                joint.col(col++) = log_density_rows(data, out.means[j], *factors[j]).array() + std::log(out.weights(j));
                mean_cov += out.covariances[j];
                ++healthy;
            }
            log_mix = log_sum_exp_rows(joint);
        }
        mean_cov /= static_cast<double>(healthy);

        std::vector<Index> order(n);
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return log_mix(a) < log_mix(b); });

        for (std::size_t r = 0; r < degenerate.size(); ++r) {
            const Index j = degenerate[r];
            FlooredFactor floored = cholesky_with_floor(mean_cov);
            if (trace != nullptr) {
                ++trace->repairs;
                if (floored.jitter > 0.0) ++trace->floor_activations;
            }
            out.means[j] = data.row(order[r]).transpose();
            out.covariances[j] = std::move(floored.cov);
            factors[j] = std::move(floored.chol);
            out.weights(j) = 1.0 / static_cast<double>(k);
        }
        out.weights /= out.weights.sum();
    }

    out.chol.reserve(k);
    for (auto& factor : factors) out.chol.push_back(std::move(*factor));

    EStepResult next = e_step(data, out);
    out.fitness = next.loglik;
    return MStepOutcome{std::move(out), std::move(next)};
}

}  // namespace

MixtureSolution MixtureSolution::from_parameters(Vector weights, std::vector<Vector> means,
                                                 std::vector<SymMatrix> covariances) {
    const Index k = weights.size();
    if (k == 0 || static_cast<Index>(means.size()) != k || static_cast<Index>(covariances.size()) != k) {
        throw InvalidParameter("mixture parameters disagree on the number of components");
    }
    MixtureSolution out;
    out.weights = std::move(weights);
    out.means = std::move(means);
    out.covariances.reserve(k);
    out.chol.reserve(k);
    for (auto& cov : covariances) {
        if (cov.rows() != out.means.front().size()) {
            throw InvalidParameter("covariance dimension does not match the means");
        }
        FlooredFactor floored = cholesky_with_floor(cov);
        out.covariances.push_back(std::move(floored.cov));
        out.chol.push_back(std::move(floored.chol));
    }
    return out;
}

Matrix MixtureSolution::centers() const {
    Matrix out(k(), d());
    for (Index j = 0; j < k(); ++j) out.row(j) = means[j].transpose();
    return out;
}

void FitConfig::validate() const {
    if (!(tolerance >= 0.0)) throw InvalidParameter("tolerance must be nonnegative");
    if (max_iterations < 1) throw InvalidParameter("max_iterations must be at least 1");
}

MixtureSolution init_random(const Matrix& data, Index k, Rng& rng) {
    const Index n = data.rows();
    const Index d = data.cols();
    if (k < 1 || k > n) {
        throw InvalidParameter("init_random: need 1 <= k <= n");
    }
    const auto picks = sample_without_replacement(rng, static_cast<std::size_t>(n), static_cast<std::size_t>(k));
    std::vector<Vector> means;
    means.reserve(k);
    for (const auto row : picks) means.emplace_back(data.row(static_cast<Index>(row)).transpose());
    std::vector<SymMatrix> covariances(k, SymMatrix::Identity(d, d));
    return MixtureSolution::from_parameters(Vector::Constant(k, 1.0 / static_cast<double>(k)), std::move(means),
                                            std::move(covariances));
}

EStepResult e_step(const Matrix& data, const MixtureSolution& solution) {
    check_dims(data, solution);
    const Matrix joint = joint_log_density(data, solution);
    const Vector norm = log_sum_exp_rows(joint);
    EStepResult out;
    out.resp.gamma = (joint.colwise() - norm).array().exp();
    // absorb exp() rounding so rows sum to one
    const Vector row_sums = out.resp.gamma.rowwise().sum();
    out.resp.gamma.array().colwise() /= row_sums.array();
    out.loglik = norm.sum();
    return out;
}

MixtureSolution m_step(const Matrix& data, const Responsibilities& resp, const RegularizationMethod& method) {
    return m_step_impl(data, resp, method, nullptr).solution;
}

MixtureSolution em_fit(const Matrix& data, const MixtureSolution& init, const RegularizationMethod& method,
                       const FitConfig& config, EmTrace* trace) {
    config.validate();
    EStepResult current_e = e_step(data, init);
    MixtureSolution current = init;
    current.fitness = current_e.loglik;
    if (trace != nullptr) trace->loglik.push_back(current.fitness);
    MixtureSolution best = current;

    for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
        MStepOutcome step = m_step_impl(data, current_e.resp, method, trace);
        const double change = std::abs(step.solution.fitness - current.fitness);
        current = std::move(step.solution);
        current_e = std::move(step.next);
        if (trace != nullptr) trace->loglik.push_back(current.fitness);
        if (current.fitness > best.fitness) best = current;
        if (change < config.tolerance) break;
    }
    return best;
}

std::vector<int> hard_assign(const Responsibilities& resp) {
    const Matrix& gamma = resp.gamma;
    std::vector<int> labels(static_cast<std::size_t>(gamma.rows()), 0);
    for (Index i = 0; i < gamma.rows(); ++i) {
        Index best = 0;
        for (Index j = 1; j < gamma.cols(); ++j) {
            if (gamma(i, j) > gamma(i, best)) best = j;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace mbclust
