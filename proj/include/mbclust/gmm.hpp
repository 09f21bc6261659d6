#pragma once

#include "mbclust/covariance.hpp"
#include "mbclust/random.hpp"

#include <limits>
#include <vector>

namespace mbclust {

/// A Gaussian mixture: weights on the simplex, one mean and one covariance
/// (with its Cholesky factor) per component, and the cached total
/// log-likelihood on the fitting data. A NaN fitness marks a solution that
/// was edited and not yet re-evaluated.
struct MixtureSolution {
    Vector weights;
    std::vector<Vector> means;
    std::vector<SymMatrix> covariances;
    std::vector<CholeskyFactor> chol;
    double fitness = std::numeric_limits<double>::quiet_NaN();

    Index k() const noexcept { return weights.size(); }
    Index d() const noexcept { return means.empty() ? 0 : means.front().size(); }
    bool has_fitness() const noexcept { return !std::isnan(fitness); }

    /// Builds a solution from raw parameters, factoring every covariance
    /// (with eigenvalue flooring). Fitness is left unset.
    static MixtureSolution from_parameters(Vector weights, std::vector<Vector> means,
                                           std::vector<SymMatrix> covariances);

    /// Means stacked as a k x d matrix.
    Matrix centers() const;
};

/// n x k ownership matrix; every row sums to one.
struct Responsibilities {
    Matrix gamma;
};

struct FitConfig {
    double tolerance = 0.1;   // absolute change in total log-likelihood
    int max_iterations = 100;

    /// Throws InvalidParameter when out of range.
    void validate() const;
};

/// Optional per-fit diagnostics filled by em_fit.
struct EmTrace {
    std::vector<double> loglik;   // fitness of every evaluated iterate, init first
    int floor_activations = 0;    // covariances that needed an eigenvalue floor
    int repairs = 0;              // degenerate components relocated
};

/// k distinct sample rows as means, identity covariances, uniform weights.
MixtureSolution init_random(const Matrix& data, Index k, Rng& rng);

struct EStepResult {
    Responsibilities resp;
    double loglik = 0.0;
};

/// Posterior ownership weights and total log-likelihood, in log space.
EStepResult e_step(const Matrix& data, const MixtureSolution& solution);

/// Re-estimates weights, means and covariances from `resp`, regularizes the
/// covariances with `method` and recomputes the fitness on `data`.
MixtureSolution m_step(const Matrix& data, const Responsibilities& resp, const RegularizationMethod& method);

/// Alternates E and M steps until the log-likelihood changes by less than
/// `config.tolerance` or `config.max_iterations` M steps have run. Returns the
/// iterate with the highest log-likelihood seen (the starting point included).
MixtureSolution em_fit(const Matrix& data, const MixtureSolution& init, const RegularizationMethod& method,
                       const FitConfig& config, EmTrace* trace = nullptr);

/// Arg-max component per row; ties go to the lowest index.
std::vector<int> hard_assign(const Responsibilities& resp);

}  // namespace mbclust
