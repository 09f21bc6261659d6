#pragma once

#include "mbclust/covariance.hpp"
#include "mbclust/datagen.hpp"
#include "mbclust/gmm.hpp"
#include "mbclust/metrics.hpp"
#include "mbclust/search.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mbclust {

enum class Strategy { KMeans, KMeansHg, Gmm, GmmMs, GmmRs, GmmHg };

/// One column of the comparison grid: a search strategy and, for the GMM
/// strategies, a covariance regularizer.
struct MethodSpec {
    Strategy strategy = Strategy::Gmm;
    RegularizationMethod regularizer = RegularizationMethod::empirical();

    /// "kmeans", "kmeans_hg", or "<gmm strategy>/<regularizer>", e.g. "gmm_hg/shrunk".
    std::string tag() const;

    /// Parses a tag as produced by tag(); a GMM strategy without a
    /// regularizer means empirical.
    static MethodSpec parse(std::string_view tag);
    static MethodSpec from(Strategy strategy, RegularizationMethod regularizer);

    bool is_gmm() const noexcept { return strategy != Strategy::KMeans && strategy != Strategy::KMeansHg; }
};

Strategy parse_strategy(std::string_view name);
std::string strategy_name(Strategy strategy);

struct ExperimentConfig {
    std::optional<std::filesystem::path> dataset_path;
    bool has_labels = true;
    std::optional<DatasetSpec> generate;  // used when no path is given
    bool standardize = false;

    std::vector<MethodSpec> methods;
    Index k = 0;
    int runs = 10;
    std::vector<std::uint64_t> seeds;  // default 1..runs
    FitConfig fit;
    SearchConfig search;
    std::optional<std::string> reference;  // method tag for Wilcoxon comparisons

    std::vector<std::uint64_t> effective_seeds() const;

    /// Throws InvalidParameter on bad values.
    void validate() const;

    /// Relative dataset paths are resolved against `base_dir`. Throws
    /// ParseError for malformed documents and InvalidParameter for bad values.
    static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);
};

struct PreparedData {
    Matrix data;
    std::optional<LabelVector> labels;
    std::optional<Matrix> true_centers;  // class means of the labelled data
};

PreparedData prepare_dataset(const ExperimentConfig& config);

struct RunRecord {
    std::string method;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double fitness = 0.0;
    std::optional<double> ari;
    std::optional<double> nmi;
    std::optional<int> ci;
    double wall_time_seconds = 0.0;
    int local_searches = 0;
};

/// Result of one fit, before scoring.
struct FitOutcome {
    double fitness = 0.0;
    LabelVector labels;
    Matrix centers;
    int local_searches = 0;
};

/// Runs one method with one seed; deterministic in (data, method, k, seed, configs).
FitOutcome fit_method(const Matrix& data, const MethodSpec& method, Index k, std::uint64_t seed,
                      const FitConfig& fit, const SearchConfig& search);

/// Fit plus scoring against ground truth when available. Fitting errors are
/// captured in the record.
RunRecord run_single(const PreparedData& prepared, const MethodSpec& method, Index k, std::uint64_t seed,
                     const FitConfig& fit, const SearchConfig& search);

/// Every (method, seed) cell, sorted by method tag then seed.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const PreparedData& prepared);

}  // namespace mbclust
