#include "mbclust/errors.hpp"
#include "mbclust/hungarian.hpp"
#include "mbclust/metrics.hpp"
#include "mbclust/search.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace mbclust {
namespace {

using testing::random_matrix;
using testing::random_psd;

MixtureSolution random_mixture(Rng& rng, Index k, Index d) {
    Vector w(k);
    std::vector<Vector> means;
    std::vector<SymMatrix> covs;
    for (Index j = 0; j < k; ++j) {
        w(j) = 0.1 + uniform01(rng);
        means.push_back(random_matrix(rng, d, 1, 5.0));
        covs.push_back(random_psd(rng, d, d) + 0.5 * SymMatrix::Identity(d, d));
    }
    return MixtureSolution::from_parameters(w / w.sum(), means, covs);
}

MixtureSolution permuted(const MixtureSolution& s, const std::vector<int>& perm) {
    Vector w(s.k());
    std::vector<Vector> means;
    std::vector<SymMatrix> covs;
    for (Index j = 0; j < s.k(); ++j) {
        const auto src = perm[static_cast<std::size_t>(j)];
        w(j) = s.weights(src);
        means.push_back(s.means[src]);
        covs.push_back(s.covariances[src]);
    }
    return MixtureSolution::from_parameters(w, means, covs);
}

// Blobs around (0,0) and (12,12) with unit covariance, labels 0 then 1.
Matrix two_blobs(Rng& rng, Index n) {
    Matrix data = random_matrix(rng, n, 2);
    data.bottomRows(n / 2).array() += 12.0;
    return data;
}

CentroidSolution with_fitness(double value) { return CentroidSolution{Matrix::Zero(1, 1), -value}; }

TEST(Crossover, IdenticalParentsGiveTheParent) {
    Rng rng(1);
    const Matrix data = random_matrix(rng, 30, 2, 4.0);
    const auto p = random_mixture(rng, 3, 2);
    const auto child = crossover(p, p, data, rng);
    for (Index j = 0; j < 3; ++j) {
        EXPECT_EQ(child.means[j], p.means[j]);
        EXPECT_EQ(child.covariances[j], p.covariances[j]);
        EXPECT_NEAR(child.weights(j), p.weights(j), 1e-15);
    }
    EXPECT_NEAR(child.fitness, e_step(data, p).loglik, 1e-9 * std::abs(child.fitness));
}

TEST(Crossover, MatchingRecoversPermutationAgainstBruteForce) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p1 = random_mixture(rng, 3, 2);
        std::vector<int> perm{0, 1, 2};
        shuffle(rng, perm);
        const auto p2 = permuted(p1, perm);
        const Matrix costs = crossover_costs(p1, p2);
        // brute force over the six matchings
        std::vector<int> best, candidate{0, 1, 2};
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            const double c = assignment_cost(costs, candidate);
            if (c < best_cost) {
                best_cost = c;
                best = candidate;
            }
        } while (std::next_permutation(candidate.begin(), candidate.end()));
        const auto matching = match_components(p1, p2);
        EXPECT_EQ(matching, best);
        for (int i = 0; i < 3; ++i) EXPECT_EQ(perm[static_cast<std::size_t>(matching[i])], i);

        const Matrix data = random_matrix(rng, 20, 2, 4.0);
        const auto child = crossover(p1, p2, data, rng);
        for (Index j = 0; j < 3; ++j) {
            EXPECT_TRUE(child.means[j].isApprox(p1.means[j]));
            EXPECT_NEAR(child.weights(j), p1.weights(j), 1e-12);
        }
    }
}

TEST(Crossover, MatchingIsSymmetricInParentOrder) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p1 = random_mixture(rng, 4, 3);
        const auto p2 = random_mixture(rng, 4, 3);
        EXPECT_TRUE(crossover_costs(p1, p2).isApprox(crossover_costs(p2, p1).transpose(), 1e-14));
        const auto forward = match_components(p1, p2);
        const auto backward = match_components(p2, p1);
        for (int i = 0; i < 4; ++i) EXPECT_EQ(backward[static_cast<std::size_t>(forward[i])], i);
    }
}

TEST(Crossover, ChildWeightsStayOnSimplex) {
    Rng rng(4);
    const Matrix data = random_matrix(rng, 25, 2, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Index k = 1 + static_cast<Index>(uniform_index(rng, 5));
        const auto child = crossover(random_mixture(rng, k, 2), random_mixture(rng, k, 2), data, rng);
        EXPECT_NEAR(child.weights.sum(), 1.0, 1e-12);
        EXPECT_GE(child.weights.minCoeff(), 0.0);
    }
}

TEST(Crossover, RejectsMismatchedParents) {
    Rng rng(5);
    const Matrix data = random_matrix(rng, 10, 2);
    EXPECT_THROW(crossover(random_mixture(rng, 2, 2), random_mixture(rng, 3, 2), data, rng), InvalidParameter);
}

TEST(Mutate, TwoComponentsCopyTheOtherCovariance) {
    Rng rng(6);
    const Matrix data = random_matrix(rng, 15, 3);
    const auto s = random_mixture(rng, 2, 3);
    const auto m = mutate(s, data, rng);
    const Index changed = m.means[0] != s.means[0] ? 0 : 1;
    EXPECT_EQ(m.covariances[changed], s.covariances[1 - changed]);
    EXPECT_EQ(m.weights, s.weights);
    bool is_sample = false;
    for (Index i = 0; i < data.rows(); ++i) is_sample = is_sample || data.row(i).transpose() == m.means[changed];
    EXPECT_TRUE(is_sample);
    EXPECT_FALSE(m.has_fitness());
}

TEST(Mutate, SharedCovarianceIsKept) {
    Rng rng(7);
    const Matrix data = random_matrix(rng, 15, 2);
    const SymMatrix shared = (SymMatrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
    const auto s = MixtureSolution::from_parameters(Vector::Constant(4, 0.25),
                                                    {Vector::Zero(2), Vector::Ones(2), -Vector::Ones(2),
                                                     Vector::Constant(2, 3.0)},
                                                    std::vector<SymMatrix>(4, shared));
    const auto m = mutate(s, data, rng);
    for (const auto& cov : m.covariances) EXPECT_TRUE(cov.isApprox(shared, 1e-15));
}

TEST(Mutate, FixedSeedPicksTheSameComponentAndSample) {
    Rng data_rng(8);
    const Matrix data = random_matrix(data_rng, 40, 2);
    const auto s = random_mixture(data_rng, 5, 2);
    Rng a(99), b(99);
    const auto m1 = mutate(s, data, a);
    const auto m2 = mutate(s, data, b);
    for (Index j = 0; j < 5; ++j) EXPECT_EQ(m1.means[j], m2.means[j]);
}

TEST(BinaryTournament, Singleton) {
    Population<CentroidSolution> pop(1, 2);
    pop.add(with_fitness(4.0));
    Rng rng(9);
    EXPECT_EQ(fitness_of(binary_tournament(pop, rng)), 4.0);
}

TEST(BinaryTournament, BetterOfTwoWinsThreeQuarters) {
    // of the four equally likely ordered draws only (worse, worse) loses
    Population<CentroidSolution> pop(2, 2);
    pop.add(with_fitness(3.0));
    pop.add(with_fitness(5.0));
    Rng rng(10);
    int wins = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) wins += fitness_of(binary_tournament(pop, rng)) == 5.0;
    EXPECT_NEAR(static_cast<double>(wins) / draws, 0.75, 0.02);
}

TEST(BinaryTournament, EqualFitnessEitherReturned) {
    Population<CentroidSolution> pop(2, 2);
    pop.add(CentroidSolution{Matrix::Constant(1, 1, 1.0), 2.0});
    pop.add(CentroidSolution{Matrix::Constant(1, 1, 2.0), 2.0});
    Rng rng(11);
    std::set<double> seen;
    for (int i = 0; i < 200; ++i) seen.insert(binary_tournament(pop, rng).centers(0, 0));
    EXPECT_EQ(seen.size(), 2u);
    Population<CentroidSolution> empty(1, 1);
    EXPECT_THROW(binary_tournament(empty, rng), InvalidState);
}

std::vector<double> fitness_values(const Population<CentroidSolution>& pop) {
    std::vector<double> out;
    for (const auto& m : pop.members()) out.push_back(fitness_of(m));
    std::sort(out.begin(), out.end());
    return out;
}

TEST(SurvivorSelection, DistinctKeepsTheBest) {
    Population<CentroidSolution> pop(3, 5);
    for (const double f : {4.0, 1.0, 6.0, 2.0, 5.0, 3.0}) pop.add(with_fitness(f));
    ASSERT_TRUE(pop.over_capacity());
    pop.survivor_selection();
    EXPECT_EQ(fitness_values(pop), (std::vector<double>{4.0, 5.0, 6.0}));
    EXPECT_FALSE(pop.over_capacity());
}

TEST(SurvivorSelection, ClonesCollapseButFillTheMinimum) {
    Population<CentroidSolution> pop(3, 5);
    for (int i = 0; i < 6; ++i) pop.add(with_fitness(7.0));
    pop.survivor_selection();
    EXPECT_EQ(pop.size(), 3u);
}

TEST(SurvivorSelection, ClonesGoBeforeDistinctSolutions) {
    Population<CentroidSolution> pop(4, 6);
    for (const double f : {1.0, 9.0, 9.0, 9.0, 2.0, 3.0, 9.0 * (1 + 1e-12)}) pop.add(with_fitness(f));
    pop.survivor_selection();
    // three of the four near-equal 9s are clones; the weak distinct ones stay
    EXPECT_EQ(pop.size(), 4u);
    const auto f = fitness_values(pop);
    EXPECT_EQ(f[0], 1.0);
    EXPECT_EQ(f[1], 2.0);
    EXPECT_EQ(f[2], 3.0);
    EXPECT_NEAR(f[3], 9.0, 1e-8);
}

TEST(SurvivorSelection, BestAlwaysSurvives) {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int pi_min = 1 + static_cast<int>(uniform_index(rng, 5));
        const int pi_max = pi_min + static_cast<int>(uniform_index(rng, 5));
        Population<CentroidSolution> pop(pi_min, pi_max);
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= pi_max; ++i) {
            const double f = static_cast<double>(uniform_index(rng, 4));
            best = std::max(best, f);
            pop.add(with_fitness(f));
        }
        pop.survivor_selection();
        EXPECT_EQ(fitness_of(pop.best()), best);
        EXPECT_LE(pop.size(), static_cast<std::size_t>(pi_max));
        EXPECT_GE(pop.size(), static_cast<std::size_t>(pi_min));
    }
}

bool non_decreasing(const std::vector<double>& v) {
    return std::is_sorted(v.begin(), v.end());
}

class StrategyTest : public ::testing::Test {
protected:
    Rng data_rng{13};
    Matrix data = two_blobs(data_rng, 200);
    GmmProblem problem{data, 2, RegularizationMethod::shrunk(), FitConfig{}};
};

TEST_F(StrategyTest, MultiStartWithOneRestartIsOneSeededFit) {
    SearchConfig config;
    config.n_it = 1;
    config.seed = 21;
    const auto result = multi_start(problem, config);
    Rng rng(21);
    const auto single = em_fit(data, init_random(data, 2, rng), problem.method, problem.fit);
    EXPECT_EQ(result.best.fitness, single.fitness);
    EXPECT_EQ(result.local_searches, 1);
}

TEST_F(StrategyTest, MultiStartKeepsTheBestRestart) {
    SearchConfig config;
    config.n_it = 8;
    config.seed = 22;
    const Matrix hard = random_matrix(data_rng, 150, 2);
    const GmmProblem p{hard, 4, RegularizationMethod::empirical(), FitConfig{}};
    const auto result = multi_start(p, config);
    Rng replay(22);
    for (int r = 0; r < 8; ++r) {
        const auto fit = p.local_search(p.random_start(replay));
        EXPECT_GE(result.best.fitness, fit.fitness);
    }
    EXPECT_TRUE(non_decreasing(result.incumbent_trace));
    EXPECT_EQ(result.best.fitness, multi_start(p, config).best.fitness);
}

TEST_F(StrategyTest, RandomSwapZeroBudgetReturnsFirstOptimum) {
    SearchConfig config;
    config.n_it = 0;
    config.seed = 23;
    const auto result = random_swap(problem, config);
    Rng rng(23);
    EXPECT_EQ(result.best.fitness, problem.local_search(problem.random_start(rng)).fitness);
}

TEST_F(StrategyTest, RandomSwapIsMonotoneAndDeterministic) {
    SearchConfig config;
    config.n_it = 10;
    config.seed = 24;
    const Matrix hard = random_matrix(data_rng, 150, 2);
    const GmmProblem p{hard, 4, RegularizationMethod::oas(), FitConfig{}};
    const auto a = random_swap(p, config);
    const auto b = random_swap(p, config);
    EXPECT_TRUE(non_decreasing(a.incumbent_trace));
    EXPECT_EQ(a.best.fitness, b.best.fitness);
    EXPECT_EQ(a.incumbent_trace, b.incumbent_trace);
}

TEST_F(StrategyTest, HgsRecoversTwoBlobs) {
    SearchConfig config;
    config.n_it = 10;
    config.pi_min = 4;
    config.pi_max = 8;
    config.seed = 25;
    const GmmProblem p{data, 2, RegularizationMethod::empirical(), FitConfig{}};
    const auto result = hgs(p, config);
    std::vector<int> truth(200, 0);
    std::fill(truth.begin() + 100, truth.end(), 1);
    EXPECT_EQ(ari(truth, hard_assign(e_step(data, result.best).resp)), 1.0);
    EXPECT_TRUE(non_decreasing(result.incumbent_trace));
    // never worse than the best member of the initial population
    EXPECT_GE(result.best.fitness, result.incumbent_trace[static_cast<std::size_t>(config.pi_max) - 1]);
}

TEST_F(StrategyTest, HgsIsDeterministic) {
    SearchConfig config;
    config.n_it = 8;
    config.pi_min = 3;
    config.pi_max = 6;
    config.seed = 26;
    const Matrix hard = random_matrix(data_rng, 120, 3);
    const GmmProblem p{hard, 3, RegularizationMethod::ledoit_wolf(), FitConfig{}};
    const auto a = hgs(p, config);
    const auto b = hgs(p, config);
    EXPECT_EQ(a.best.fitness, b.best.fitness);
    EXPECT_EQ(a.incumbent_trace, b.incumbent_trace);
    EXPECT_TRUE(non_decreasing(a.incumbent_trace));
}

TEST(KMeansSearch, HgsNeverLosesToItsStarts) {
    Rng rng(27);
    const Matrix data = random_matrix(rng, 200, 2);
    const KMeansProblem p{data, 6, FitConfig{}};
    SearchConfig config;
    config.n_it = 20;
    config.seed = 3;
    const auto result = hgs(p, config);
    EXPECT_TRUE(non_decreasing(result.incumbent_trace));
    EXPECT_NEAR(result.best.sse, sum_of_squares(data, result.best.centers), 1e-9 * result.best.sse);
    Rng replay(3);
    EXPECT_LE(result.best.sse, p.local_search(p.random_start(replay)).sse);
}

TEST(KMeansSearch, CrossoverOfIdenticalParents) {
    Rng rng(28);
    const Matrix data = random_matrix(rng, 30, 2);
    const CentroidSolution p{data.topRows(3), sum_of_squares(data, data.topRows(3))};
    const auto child = crossover(p, p, data, rng);
    EXPECT_EQ(child.centers, p.centers);
    EXPECT_EQ(child.sse, p.sse);
}

TEST(SearchConfig, Validation) {
    SearchConfig c;
    c.validate();
    c.pi_max = 5;
    EXPECT_THROW(c.validate(), InvalidParameter);
    c = SearchConfig{};
    c.n_it = -1;
    EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(Improves, RelativeThreshold) {
    EXPECT_TRUE(improves(-99.0, -100.0));
    EXPECT_FALSE(improves(-100.0 + 1e-8, -100.0));
    EXPECT_FALSE(improves(std::numeric_limits<double>::quiet_NaN(), -100.0));
    EXPECT_TRUE(improves(-1e300, -std::numeric_limits<double>::infinity()));
}

}  // namespace
}  // namespace mbclust
