#include "mbclust/errors.hpp"
#include "mbclust/kmeans.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace mbclust {
namespace {

using testing::random_matrix;

Matrix column(std::initializer_list<double> values) {
    Matrix m(static_cast<Index>(values.size()), 1);
    Index i = 0;
    for (const double v : values) m(i++, 0) = v;
    return m;
}

TEST(Lloyd, DistinctCentersAreAFixedPoint) {
    const Matrix data = (Matrix(3, 2) << 0, 0, 5, 1, -2, 7).finished();
    const auto s = lloyd_fit(data, data, {});
    EXPECT_EQ(s.sse, 0.0);
    EXPECT_EQ(s.centers, data);
}

TEST(Lloyd, TwoBlobsInOneDimension) {
    const Matrix data = column({0, 0.1, 10, 10.1});
    const auto s = lloyd_fit(data, column({0, 0.1}), {});
    std::vector<double> c{s.centers(0, 0), s.centers(1, 0)};
    std::sort(c.begin(), c.end());
    EXPECT_NEAR(c[0], 0.05, 1e-12);
    EXPECT_NEAR(c[1], 10.05, 1e-12);
    EXPECT_NEAR(s.sse, 4 * 0.05 * 0.05, 1e-12);
}

TEST(Lloyd, SingleCenterIsGrandMean) {
    Rng rng(1);
    const Matrix data = random_matrix(rng, 40, 3);
    const auto s = lloyd_fit(data, data.topRows(1), {});
    EXPECT_TRUE(s.centers.row(0).isApprox(data.colwise().mean(), 1e-12));
}

TEST(Lloyd, SseNeverIncreases) {
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix data = random_matrix(rng, 100, 2);
        std::vector<double> trace;
        lloyd_fit(data, init_random_centers(data, 5, rng), {0.0, 100}, &trace);
        ASSERT_GE(trace.size(), 2u);
        for (std::size_t t = 1; t < trace.size(); ++t) EXPECT_LE(trace[t], trace[t - 1] + 1e-10);
    }
}

TEST(Lloyd, RowOrderDoesNotMatter) {
    Rng rng(3);
    const Matrix data = random_matrix(rng, 60, 2);
    const Matrix init = data.topRows(4);
    std::vector<Index> perm(60);
    for (Index i = 0; i < 60; ++i) perm[static_cast<std::size_t>(i)] = i;
    shuffle(rng, perm);
    Matrix shuffled(60, 2);
    for (Index i = 0; i < 60; ++i) shuffled.row(i) = data.row(perm[static_cast<std::size_t>(i)]);
    const auto a = lloyd_fit(data, init, {0.0, 100});
    const auto b = lloyd_fit(shuffled, init, {0.0, 100});
    EXPECT_TRUE(a.centers.isApprox(b.centers, 1e-12));
    EXPECT_NEAR(a.sse, b.sse, 1e-9 * a.sse);
}

TEST(Lloyd, EmptyClusterIsRelocated) {
    const Matrix data = column({0, 1, 2, 10, 11});
    const auto s = lloyd_fit(data, column({1, 1000, 10.5}), {0.0, 100});
    std::vector<double> c{s.centers(0, 0), s.centers(1, 0), s.centers(2, 0)};
    std::sort(c.begin(), c.end());
    EXPECT_LT(c[2], 12.0);
    EXPECT_EQ(s.k(), 3);
    EXPECT_NEAR(s.sse, sum_of_squares(data, s.centers), 1e-12);
}

TEST(NearestCenter, TiesGoToLowestIndex) {
    const Matrix centers = column({-1, 1});
    EXPECT_EQ(nearest_center(column({0, 0.5, -3}), centers), (std::vector<int>{0, 1, 0}));
}

TEST(InitRandomCenters, DistinctRows) {
    Rng rng(4);
    const Matrix data = random_matrix(rng, 10, 2);
    const Matrix c = init_random_centers(data, 10, rng);
    EXPECT_EQ(sum_of_squares(data, c), 0.0);
    EXPECT_THROW(init_random_centers(data, 11, rng), InvalidParameter);
}

}  // namespace
}  // namespace mbclust
