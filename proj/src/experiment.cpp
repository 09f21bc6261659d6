#include "mbclust/experiment.hpp"

#include "mbclust/dataset_io.hpp"
#include "mbclust/errors.hpp"
#include "mbclust/kmeans.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

namespace mbclust {

namespace {

using nlohmann::json;

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::KMeans, "kmeans"}, {Strategy::KMeansHg, "kmeans_hg"}, {Strategy::Gmm, "gmm"},
    {Strategy::GmmMs, "gmm_ms"},  {Strategy::GmmRs, "gmm_rs"},       {Strategy::GmmHg, "gmm_hg"},
};

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& item : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ParseError("unknown key '" + item.key() + "' in " + std::string(where));
        }
    }
}

template <class T>
T get_or(const json& object, const char* key, T fallback) {
    const auto it = object.find(key);
    if (it == object.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError("bad value for '" + std::string(key) + "': " + e.what());
    }
}

DatasetSpec parse_generate(const json& node) {
    if (!node.is_object()) throw ParseError("'generate' must be an object");
    reject_unknown_keys(node, {"k", "d", "c", "n", "seed", "eig_min", "eig_max", "alpha"}, "dataset.generate");
    DatasetSpec spec;
    spec.k = get_or<Index>(node, "k", spec.k);
    spec.d = get_or<Index>(node, "d", spec.d);
    spec.c = get_or<double>(node, "c", spec.c);
    spec.n = get_or<Index>(node, "n", spec.n);
    spec.seed = get_or<std::uint64_t>(node, "seed", spec.seed);
    spec.eig_min = get_or<double>(node, "eig_min", spec.eig_min);
    spec.eig_max = get_or<double>(node, "eig_max", spec.eig_max);
    spec.alpha = get_or<double>(node, "alpha", spec.alpha);
    spec.validate();
    return spec;
}

MethodSpec parse_method_node(const json& node) {
    if (node.is_string()) return MethodSpec::parse(node.get<std::string>());
    if (node.is_object()) {
        reject_unknown_keys(node, {"method", "regularizer"}, "methods[]");
        const auto strategy = parse_strategy(get_or<std::string>(node, "method", ""));
        const auto regularizer = RegularizationMethod::parse(get_or<std::string>(node, "regularizer", "empirical"));
        return MethodSpec::from(strategy, regularizer);
    }
    throw ParseError("each method must be a string or an object");
}

Index infer_k(const ExperimentConfig& config, const PreparedData& prepared) {
    if (config.k > 0) return config.k;
    if (config.generate && !config.dataset_path) return config.generate->k;
    if (prepared.labels) {
        return static_cast<Index>(std::set<int>(prepared.labels->begin(), prepared.labels->end()).size());
    }
    throw InvalidParameter("k is required for unlabelled datasets");
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
    for (const auto& [strategy, text] : kStrategyNames) {
        if (text == name) return strategy;
    }
    throw InvalidParameter("unknown method '" + std::string(name) + "'");
}

std::string strategy_name(Strategy strategy) {
    for (const auto& [s, text] : kStrategyNames) {
        if (s == strategy) return std::string(text);
    }
    return "unknown";
}

std::string MethodSpec::tag() const {
    if (!is_gmm()) return strategy_name(strategy);
    return strategy_name(strategy) + "/" + regularizer.name();
}

MethodSpec MethodSpec::parse(std::string_view tag) {
    const auto slash = tag.find('/');
    const Strategy strategy = parse_strategy(tag.substr(0, slash));
    const auto regularizer = slash == std::string_view::npos ? RegularizationMethod::empirical()
                                                             : RegularizationMethod::parse(tag.substr(slash + 1));
    return from(strategy, regularizer);
}

MethodSpec MethodSpec::from(Strategy strategy, RegularizationMethod regularizer) {
    MethodSpec spec{strategy, regularizer};
    if (!spec.is_gmm()) spec.regularizer = RegularizationMethod::empirical();
    return spec;
}

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    for (int r = 1; r <= runs; ++r) out.push_back(static_cast<std::uint64_t>(r));
    return out;
}

void ExperimentConfig::validate() const {
    if (!dataset_path && !generate) throw InvalidParameter("config needs a dataset path or a generator spec");
    if (methods.empty()) throw InvalidParameter("config lists no methods");
    if (runs < 1) throw InvalidParameter("runs must be at least 1");
    if (k < 0) throw InvalidParameter("k must be positive");
    fit.validate();
    search.validate();
    if (generate) generate->validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ParseError("experiment config must be a JSON object");
    reject_unknown_keys(doc, {"dataset", "standardize", "methods", "k", "runs", "seeds", "fit", "search", "reference"},
                        "config");
    ExperimentConfig config;

    const auto dataset = doc.find("dataset");
    if (dataset == doc.end() || !dataset->is_object()) throw ParseError("config needs a 'dataset' object");
    reject_unknown_keys(*dataset, {"path", "has_labels", "generate"}, "dataset");
    if (dataset->contains("path")) {
        std::filesystem::path path = get_or<std::string>(*dataset, "path", "");
        config.dataset_path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }
    config.has_labels = get_or<bool>(*dataset, "has_labels", true);
    if (dataset->contains("generate")) config.generate = parse_generate(dataset->at("generate"));

    config.standardize = get_or<bool>(doc, "standardize", false);
    config.k = get_or<Index>(doc, "k", 0);
    config.runs = get_or<int>(doc, "runs", 10);
    config.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", {});

    const auto methods = doc.find("methods");
    if (methods == doc.end() || !methods->is_array()) throw ParseError("config needs a 'methods' array");
    for (const auto& node : *methods) config.methods.push_back(parse_method_node(node));

    if (const auto fit = doc.find("fit"); fit != doc.end()) {
        reject_unknown_keys(*fit, {"tolerance", "max_iterations"}, "fit");
        config.fit.tolerance = get_or<double>(*fit, "tolerance", config.fit.tolerance);
        config.fit.max_iterations = get_or<int>(*fit, "max_iterations", config.fit.max_iterations);
    }
    if (const auto search = doc.find("search"); search != doc.end()) {
        reject_unknown_keys(*search, {"n_it", "pi_min", "pi_max"}, "search");
        config.search.n_it = get_or<int>(*search, "n_it", config.search.n_it);
        config.search.pi_min = get_or<int>(*search, "pi_min", config.search.pi_min);
        config.search.pi_max = get_or<int>(*search, "pi_max", config.search.pi_max);
    }
    if (doc.contains("reference")) {
        config.reference = MethodSpec::parse(get_or<std::string>(doc, "reference", "")).tag();
    }
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return from_json(doc, path.parent_path());
}

PreparedData prepare_dataset(const ExperimentConfig& config) {
    PreparedData out;
    if (config.dataset_path) {
        Dataset loaded = load_dataset(*config.dataset_path, config.has_labels);
        out.data = std::move(loaded.data);
        out.labels = std::move(loaded.labels);
    } else if (config.generate) {
        GeneratedDataset generated = generate(*config.generate);
        out.data = std::move(generated.data);
        out.labels = std::move(generated.truth.labels);
    } else {
        throw InvalidParameter("config needs a dataset path or a generator spec");
    }
    if (config.standardize) out.data = standardize(out.data);
    if (out.labels) out.true_centers = class_centers(out.data, *out.labels);
    return out;
}

FitOutcome fit_method(const Matrix& data, const MethodSpec& method, Index k, std::uint64_t seed,
                      const FitConfig& fit, const SearchConfig& search) {
    SearchConfig seeded = search;
    seeded.seed = seed;
    FitOutcome out;

    if (!method.is_gmm()) {
        const KMeansProblem problem{data, k, fit};
        CentroidSolution best;
        if (method.strategy == Strategy::KMeans) {
            Rng rng(seed);
            best = problem.local_search(problem.random_start(rng));
            out.local_searches = 1;
        } else {
            auto result = hgs(problem, seeded);
            best = std::move(result.best);
            out.local_searches = result.local_searches;
        }
        out.fitness = -best.sse;
        out.labels = nearest_center(data, best.centers);
        out.centers = std::move(best.centers);
        return out;
    }

    const GmmProblem problem{data, k, method.regularizer, fit};
    MixtureSolution best;
    switch (method.strategy) {
        case Strategy::Gmm: {
            Rng rng(seed);
            best = problem.local_search(problem.random_start(rng));
            out.local_searches = 1;
            break;
        }
        case Strategy::GmmMs: {
            auto result = multi_start(problem, seeded);
            best = std::move(result.best);
            out.local_searches = result.local_searches;
            break;
        }
        case Strategy::GmmRs: {
            auto result = random_swap(problem, seeded);
            best = std::move(result.best);
            out.local_searches = result.local_searches;
            break;
        }
        case Strategy::GmmHg: {
            auto result = hgs(problem, seeded);
            best = std::move(result.best);
            out.local_searches = result.local_searches;
            break;
        }
        default:
            throw InvalidParameter("not a GMM strategy");
    }
    out.fitness = best.fitness;
    out.labels = hard_assign(e_step(data, best).resp);
    out.centers = best.centers();
    return out;
}

RunRecord run_single(const PreparedData& prepared, const MethodSpec& method, Index k, std::uint64_t seed,
                     const FitConfig& fit, const SearchConfig& search) {
    RunRecord record;
    record.method = method.tag();
    record.seed = seed;
    try {
        const auto start = std::chrono::steady_clock::now();
        FitOutcome outcome = fit_method(prepared.data, method, k, seed, fit, search);
        const auto stop = std::chrono::steady_clock::now();
        record.wall_time_seconds = std::chrono::duration<double>(stop - start).count();
        record.fitness = outcome.fitness;
        record.local_searches = outcome.local_searches;
        if (prepared.labels) {
            record.ari = ari(*prepared.labels, outcome.labels);
            record.nmi = nmi(*prepared.labels, outcome.labels);
            if (prepared.true_centers && prepared.true_centers->rows() == outcome.centers.rows()) {
                record.ci = centroid_index(*prepared.true_centers, outcome.centers);
            }
        }
    } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
    }
    return record;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const PreparedData& prepared) {
    config.validate();
    const Index k = infer_k(config, prepared);
    if (k < 1 || k > prepared.data.rows()) throw InvalidParameter("k must lie in [1, n]");

    std::vector<MethodSpec> methods = config.methods;
    std::sort(methods.begin(), methods.end(), [](const MethodSpec& a, const MethodSpec& b) { return a.tag() < b.tag(); });
    methods.erase(std::unique(methods.begin(), methods.end(),
                              [](const MethodSpec& a, const MethodSpec& b) { return a.tag() == b.tag(); }),
                  methods.end());
    std::vector<std::uint64_t> seeds = config.effective_seeds();
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    std::vector<RunRecord> records;
    records.reserve(methods.size() * seeds.size());
    for (const auto& method : methods) {
        for (const auto seed : seeds) records.push_back(run_single(prepared, method, k, seed, config.fit, config.search));
    }
    return records;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, prepare_dataset(config));
}

}  // namespace mbclust
