#pragma once

#include "mbclust/errors.hpp"
#include "mbclust/gmm.hpp"
#include "mbclust/kmeans.hpp"
#include "mbclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace mbclust {

struct SearchConfig {
    int n_it = 100;      // budget: restarts (multi-start) or non-improving iterations
    int pi_min = 10;
    int pi_max = 20;
    std::uint64_t seed = 1;

    /// Throws InvalidParameter when out of range.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Variation operators

/// Eq. 7 style matching costs between the components of two mixtures: the
/// average of the two Mahalanobis distances, each measured under the other
/// component's covariance.
Matrix crossover_costs(const MixtureSolution& p1, const MixtureSolution& p2);

/// Column of `p2` matched to each component of `p1`.
std::vector<int> match_components(const MixtureSolution& p1, const MixtureSolution& p2);

/// Child keeps, for each matched pair, one parent's mean and covariance (fair
/// coin) and the average of the two weights; weights are renormalized and the
/// fitness evaluated on `data`.
MixtureSolution crossover(const MixtureSolution& p1, const MixtureSolution& p2, const Matrix& data, Rng& rng);

/// Moves a uniformly chosen component onto a uniformly chosen sample and
/// resets its covariance to the mean of the other covariances. Weights are
/// kept and the fitness is invalidated. k = 1 returns the input unchanged.
MixtureSolution mutate(const MixtureSolution& solution, const Matrix& data, Rng& rng);

/// Random-swap perturbation: relocates one component mean to a sample,
/// keeping every covariance and weight. Fitness is invalidated.
MixtureSolution swap_component(const MixtureSolution& solution, const Matrix& data, Rng& rng);

/// Euclidean matching between two center sets.
Matrix center_costs(const Matrix& a, const Matrix& b);

CentroidSolution crossover(const CentroidSolution& p1, const CentroidSolution& p2, const Matrix& data, Rng& rng);

/// Relocates one uniformly chosen center onto a uniformly chosen sample.
CentroidSolution mutate(const CentroidSolution& solution, const Matrix& data, Rng& rng);

// ---------------------------------------------------------------------------
// Fitness (larger is better)

inline double fitness_of(const MixtureSolution& s) { return s.fitness; }
inline double fitness_of(const CentroidSolution& s) { return -s.sse; }

/// Strict increase beyond a 1e-9 relative margin.
inline bool improves(double candidate, double incumbent) {
    if (std::isnan(candidate)) return false;
    if (std::isinf(incumbent) && incumbent < 0.0) return !std::isinf(candidate) || candidate > 0.0;
    return candidate - incumbent > 1e-9 * std::abs(incumbent);
}

inline bool same_fitness(double a, double b) {
    return a == b || std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------
// Population

template <class Solution>
class Population {
public:
    Population(int pi_min, int pi_max) : pi_min_(pi_min), pi_max_(pi_max) {
        if (pi_min < 1 || pi_max < pi_min) throw InvalidParameter("population bounds need 1 <= pi_min <= pi_max");
    }

    void add(Solution s) { members_.push_back(std::move(s)); }

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    int pi_min() const noexcept { return pi_min_; }
    int pi_max() const noexcept { return pi_max_; }
    bool over_capacity() const noexcept { return members_.size() > static_cast<std::size_t>(pi_max_); }

    const std::vector<Solution>& members() const noexcept { return members_; }
    const Solution& operator[](std::size_t i) const { return members_[i]; }

    const Solution& best() const {
        if (members_.empty()) throw InvalidState("population is empty");
        return *std::max_element(members_.begin(), members_.end(), [](const Solution& a, const Solution& b) {
            return fitness_of(a) < fitness_of(b);
        });
    }

    /// Clone elimination then truncation to the pi_min fittest. Clones share
    /// an objective value (1e-9 relative); the fittest copy is kept and the
    /// lowest-valued clones go first.
    void survivor_selection() {
        const std::size_t target = static_cast<std::size_t>(pi_min_);
        std::vector<std::size_t> order(members_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        // best first; insertion order breaks ties so older members survive
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fitness_of(members_[a]) > fitness_of(members_[b]);
        });

        std::vector<char> is_clone(members_.size(), 0);
        for (std::size_t r = 1; r < order.size(); ++r) {
            if (same_fitness(fitness_of(members_[order[r]]), fitness_of(members_[order[r - 1]]))) {
                is_clone[order[r]] = 1;
            }
        }

        std::vector<char> removed(members_.size(), 0);
        std::size_t alive = members_.size();
        for (std::size_t r = order.size(); r-- > 0 && alive > target;) {
            if (is_clone[order[r]]) {
                removed[order[r]] = 1;
                --alive;
            }
        }
        for (std::size_t r = order.size(); r-- > 0 && alive > target;) {
            if (!removed[order[r]]) {
                removed[order[r]] = 1;
                --alive;
            }
        }

        std::vector<Solution> kept;
        kept.reserve(alive);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (!removed[i]) kept.push_back(std::move(members_[i]));
        }
        members_ = std::move(kept);
    }

private:
    int pi_min_;
    int pi_max_;
    std::vector<Solution> members_;
};

/// Two uniform draws with replacement; the fitter one wins (first on ties).
template <class Solution>
const Solution& binary_tournament(const Population<Solution>& pop, Rng& rng) {
    if (pop.empty()) throw InvalidState("binary_tournament: population is empty");
    const auto& a = pop[uniform_index(rng, pop.size())];
    const auto& b = pop[uniform_index(rng, pop.size())];
    return fitness_of(b) > fitness_of(a) ? b : a;
}

// ---------------------------------------------------------------------------
// Local-search problems driven by the strategies below

template <class P>
concept SearchProblem = requires(const P& p, const typename P::Solution& s, Rng& rng) {
    { p.random_start(rng) } -> std::same_as<typename P::Solution>;
    { p.local_search(s) } -> std::same_as<typename P::Solution>;
    { p.crossover(s, s, rng) } -> std::same_as<typename P::Solution>;
    { p.mutate(s, rng) } -> std::same_as<typename P::Solution>;
    { p.swap(s, rng) } -> std::same_as<typename P::Solution>;
};

/// Regularized EM on a Gaussian mixture. Fitness = total log-likelihood.
struct GmmProblem {
    using Solution = MixtureSolution;

    const Matrix& data;
    Index k;
    RegularizationMethod method;
    FitConfig fit;

    Solution random_start(Rng& rng) const { return init_random(data, k, rng); }
    Solution local_search(const Solution& start) const { return em_fit(data, start, method, fit); }
    Solution crossover(const Solution& a, const Solution& b, Rng& rng) const {
        return mbclust::crossover(a, b, data, rng);
    }
    Solution mutate(const Solution& s, Rng& rng) const { return mbclust::mutate(s, data, rng); }
    Solution swap(const Solution& s, Rng& rng) const { return swap_component(s, data, rng); }
};

/// Lloyd's k-means. Fitness = -SSE.
struct KMeansProblem {
    using Solution = CentroidSolution;

    const Matrix& data;
    Index k;
    FitConfig fit;

    Solution random_start(Rng& rng) const {
        Matrix centers = init_random_centers(data, k, rng);
        const double sse = sum_of_squares(data, centers);
        return Solution{std::move(centers), sse};
    }
    Solution local_search(const Solution& start) const { return lloyd_fit(data, start.centers, fit); }
    Solution crossover(const Solution& a, const Solution& b, Rng& rng) const {
        return mbclust::crossover(a, b, data, rng);
    }
    Solution mutate(const Solution& s, Rng& rng) const { return mbclust::mutate(s, data, rng); }
    Solution swap(const Solution& s, Rng& rng) const { return mbclust::mutate(s, data, rng); }
};

static_assert(SearchProblem<GmmProblem>);
static_assert(SearchProblem<KMeansProblem>);

template <class Solution>
struct SearchResult {
    Solution best;
    std::vector<double> incumbent_trace;  // best fitness after every local search
    int local_searches = 0;
    int failed_local_searches = 0;
};

namespace detail {

// Local search that reports DegenerateCluster as a discarded start.
template <SearchProblem P>
std::optional<typename P::Solution> try_local_search(const P& problem, const typename P::Solution& start) {
    try {
        return problem.local_search(start);
    } catch (const DegenerateCluster&) {
        return std::nullopt;
    }
}

template <SearchProblem P>
typename P::Solution first_local_optimum(const P& problem, Rng& rng, int& failures) {
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        if (auto s = try_local_search(problem, problem.random_start(rng))) return std::move(*s);
        ++failures;
    }
    throw DegenerateCluster("no random start produced a valid local optimum");
}

}  // namespace detail

/// Keeps the best of `config.n_it` local searches from random starts
/// (at least one).
template <SearchProblem P>
SearchResult<typename P::Solution> multi_start(const P& problem, const SearchConfig& config) {
    config.validate();
    Rng rng(config.seed);
    int failures = 0;
    SearchResult<typename P::Solution> out{detail::first_local_optimum(problem, rng, failures), {}, 1, 0};
    out.incumbent_trace.push_back(fitness_of(out.best));
    for (int restart = 1; restart < config.n_it; ++restart) {
        auto candidate = detail::try_local_search(problem, problem.random_start(rng));
        ++out.local_searches;
        if (!candidate) {
            ++failures;
        } else if (improves(fitness_of(*candidate), fitness_of(out.best))) {
            out.best = std::move(*candidate);
        }
        out.incumbent_trace.push_back(fitness_of(out.best));
    }
    out.failed_local_searches = failures;
    return out;
}

/// Iterated local search: perturb the incumbent with a random swap, re-run
/// the local search, keep the result only if it improves. Stops after
/// `config.n_it` consecutive rejections.
template <SearchProblem P>
SearchResult<typename P::Solution> random_swap(const P& problem, const SearchConfig& config) {
    config.validate();
    Rng rng(config.seed);
    int failures = 0;
    SearchResult<typename P::Solution> out{detail::first_local_optimum(problem, rng, failures), {}, 1, 0};
    out.incumbent_trace.push_back(fitness_of(out.best));
    for (int stale = 0; stale < config.n_it;) {
        auto candidate = detail::try_local_search(problem, problem.swap(out.best, rng));
        ++out.local_searches;
        if (candidate && improves(fitness_of(*candidate), fitness_of(out.best))) {
            out.best = std::move(*candidate);
            stale = 0;
        } else {
            if (!candidate) ++failures;
            ++stale;
        }
        out.incumbent_trace.push_back(fitness_of(out.best));
    }
    out.failed_local_searches = failures;
    return out;
}

/// Hybrid genetic search: a population of local optima evolved by binary
/// tournament, matching crossover, mutation and local improvement, with
/// survivor selection whenever it grows past pi_max. Stops after
/// `config.n_it` consecutive offspring fail to improve the best solution.
template <SearchProblem P>
SearchResult<typename P::Solution> hgs(const P& problem, const SearchConfig& config) {
    config.validate();
    using Solution = typename P::Solution;
    Rng rng(config.seed);
    int failures = 0;

    Population<Solution> population(config.pi_min, config.pi_max);
    std::vector<double> trace;
    std::optional<Solution> best;
    int local_searches = 0;
    for (int i = 0; i < config.pi_max; ++i) {
        Solution s = detail::first_local_optimum(problem, rng, failures);
        ++local_searches;
        if (!best || improves(fitness_of(s), fitness_of(*best))) best = s;
        trace.push_back(fitness_of(*best));
        population.add(std::move(s));
    }

    for (int stale = 0; stale < config.n_it;) {
        const Solution& p1 = binary_tournament(population, rng);
        const Solution& p2 = binary_tournament(population, rng);
        Solution child = problem.mutate(problem.crossover(p1, p2, rng), rng);
        auto improved = detail::try_local_search(problem, child);
        ++local_searches;
        if (!improved) {
            ++failures;
            ++stale;
            trace.push_back(fitness_of(*best));
            continue;
        }
        if (improves(fitness_of(*improved), fitness_of(*best))) {
            best = *improved;
            stale = 0;
        } else {
            ++stale;
        }
        trace.push_back(fitness_of(*best));
        population.add(std::move(*improved));
        if (population.over_capacity()) population.survivor_selection();
    }
    return SearchResult<Solution>{std::move(*best), std::move(trace), local_searches, failures};
}

}  // namespace mbclust
