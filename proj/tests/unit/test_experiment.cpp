#include "mbclust/errors.hpp"
#include "mbclust/experiment.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

namespace mbclust {
namespace {

using nlohmann::json;

ExperimentConfig small_generated(std::vector<std::string> methods, int runs) {
    json doc = {{"dataset", {{"generate", {{"k", 2}, {"d", 2}, {"c", 0.2}, {"n", 80}, {"seed", 3}}}}},
                {"methods", methods},
                {"runs", runs},
                {"search", {{"n_it", 3}, {"pi_min", 2}, {"pi_max", 4}}}};
    return ExperimentConfig::from_json(doc);
}

void expect_same_metrics(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].method, b[i].method);
        EXPECT_EQ(a[i].seed, b[i].seed);
        EXPECT_EQ(a[i].fitness, b[i].fitness);
        EXPECT_EQ(a[i].ari, b[i].ari);
        EXPECT_EQ(a[i].nmi, b[i].nmi);
        EXPECT_EQ(a[i].ci, b[i].ci);
    }
}

TEST(MethodSpec, TagsRoundTrip) {
    for (const std::string tag : {"kmeans", "kmeans_hg", "gmm/empirical", "gmm_ms/shrunk", "gmm_rs/oas",
                                  "gmm_hg/ledoitwolf", "gmm_hg/shrunk:0.3"}) {
        EXPECT_EQ(MethodSpec::parse(tag).tag(), tag);
    }
    EXPECT_EQ(MethodSpec::parse("gmm_hg").tag(), "gmm_hg/empirical");
    EXPECT_EQ(MethodSpec::from(Strategy::KMeans, RegularizationMethod::oas()).tag(), "kmeans");
    EXPECT_THROW(MethodSpec::parse("em"), InvalidParameter);
}

TEST(ExperimentConfig, ParsesStringsAndObjects) {
    const json doc = {{"dataset", {{"path", "iris.csv"}}},
                      {"methods", json::array({"kmeans", {{"method", "gmm_hg"}, {"regularizer", "shrunk"}}})},
                      {"runs", 3},
                      {"reference", "gmm_hg/shrunk"}};
    const auto config = ExperimentConfig::from_json(doc, "/data");
    EXPECT_EQ(*config.dataset_path, std::filesystem::path("/data/iris.csv"));
    ASSERT_EQ(config.methods.size(), 2u);
    EXPECT_EQ(config.methods[1].tag(), "gmm_hg/shrunk");
    EXPECT_EQ(config.effective_seeds(), (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(*config.reference, "gmm_hg/shrunk");
    EXPECT_EQ(config.fit.tolerance, 0.1);
    EXPECT_EQ(config.search.n_it, 100);
}

TEST(ExperimentConfig, RejectsBadDocuments) {
    const json base = {{"dataset", {{"path", "x.csv"}}}, {"methods", {"kmeans"}}};
    EXPECT_NO_THROW(ExperimentConfig::from_json(base));
    json unknown = base;
    unknown["iterations"] = 5;
    EXPECT_THROW(ExperimentConfig::from_json(unknown), ParseError);
    json no_methods = base;
    no_methods["methods"] = json::array();
    EXPECT_THROW(ExperimentConfig::from_json(no_methods), InvalidParameter);
    json bad_runs = base;
    bad_runs["runs"] = 0;
    EXPECT_THROW(ExperimentConfig::from_json(bad_runs), InvalidParameter);
    json bad_method = base;
    bad_method["methods"] = {"gmm_xx"};
    EXPECT_THROW(ExperimentConfig::from_json(bad_method), InvalidParameter);
    json wrong_type = base;
    wrong_type["runs"] = "ten";
    EXPECT_THROW(ExperimentConfig::from_json(wrong_type), ParseError);
    EXPECT_THROW(ExperimentConfig::from_json(json{{"methods", {"kmeans"}}}), ParseError);
}

TEST(RunExperiment, OneRunOneMethodGivesOneRecord) {
    const auto records = run_experiment(small_generated({"gmm/shrunk"}, 1));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_FALSE(records[0].failed);
    EXPECT_EQ(records[0].seed, 1u);
    EXPECT_GE(records[0].wall_time_seconds, 0.0);
    EXPECT_TRUE(records[0].ari.has_value());
    EXPECT_TRUE(records[0].ci.has_value());
}

TEST(RunExperiment, GridIsSortedByMethodThenSeed) {
    auto config = small_generated({"kmeans", "gmm_hg/oas"}, 3);
    config.seeds = {9, 2, 5};
    const auto records = run_experiment(config);
    ASSERT_EQ(records.size(), 6u);
    EXPECT_EQ(records[0].method, "gmm_hg/oas");
    EXPECT_EQ(records[0].seed, 2u);
    EXPECT_EQ(records[2].seed, 9u);
    EXPECT_EQ(records[3].method, "kmeans");
}

TEST(RunExperiment, RepeatableMetrics) {
    const auto config = small_generated({"kmeans", "kmeans_hg", "gmm", "gmm_ms/shrunk", "gmm_rs/lw", "gmm_hg/oas"}, 2);
    expect_same_metrics(run_experiment(config), run_experiment(config));
}

TEST(RunExperiment, FailedRunDoesNotAbortTheGrid) {
    auto config = small_generated({"kmeans"}, 2);
    PreparedData prepared = prepare_dataset(config);
    prepared.labels->pop_back();  // scoring now fails for every run
    const auto records = run_experiment(config, prepared);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_TRUE(records[0].failed);
    EXPECT_FALSE(records[0].error.empty());
}

TEST(RunExperiment, CentroidIndexOnlyWhenCenterCountsAgree) {
    auto config = small_generated({"kmeans"}, 1);
    config.k = 3;  // the generated data has two classes
    const auto records = run_experiment(config);
    EXPECT_FALSE(records[0].failed);
    EXPECT_TRUE(records[0].ari.has_value());
    EXPECT_FALSE(records[0].ci.has_value());
}

TEST(RunExperiment, LabelledFileInfersK) {
    const json doc = {{"dataset", {{"path", MBCLUST_UCI_DATA "/iris.csv"}, {"has_labels", true}}},
                      {"methods", {"kmeans"}},
                      {"runs", 1}};
    const auto records = run_experiment(ExperimentConfig::from_json(doc));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_TRUE(records[0].ci.has_value());
    EXPECT_GT(*records[0].ari, 0.4);
}

TEST(FitMethod, KMeansFitnessIsNegativeSse) {
    const auto config = small_generated({"kmeans"}, 1);
    const auto prepared = prepare_dataset(config);
    const auto outcome = fit_method(prepared.data, MethodSpec::parse("kmeans"), 2, 4, config.fit, config.search);
    EXPECT_LT(outcome.fitness, 0.0);
    EXPECT_EQ(outcome.labels.size(), static_cast<std::size_t>(prepared.data.rows()));
    EXPECT_EQ(outcome.centers.rows(), 2);
}

}  // namespace
}  // namespace mbclust
