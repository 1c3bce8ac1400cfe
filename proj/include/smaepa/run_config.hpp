#pragma once

// JSON configuration of an experiment run.
//
// {"master_seed": 42, "epa_types": ["Order"], "horizons": [1, 3, 7], "quantiles": [2, 3, 5],
//  "models": ["forest", "logistic"], "forest": {"n_trees": 100}, "logistic": {"epochs": 500},
//  "fill_policy": "zero", "strict": false, "aggregate_duplicates": false,
//  "categories": {"V01": "Food"}}
//
// "categories" may also be a path to a JSON object file, resolved against the
// directory of the config file.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "smaepa/eval.hpp"

namespace smaepa {

struct RunConfig {
    std::uint64_t master_seed = 0;
    std::vector<labeling::PredictionTask> tasks = labeling::full_task_grid();
    std::vector<learn::ModelKind> models{learn::ModelKind::Forest, learn::ModelKind::Logistic};
    learn::ForestConfig forest;
    learn::LogisticConfig logistic;
    FillPolicy fill = FillPolicy::ZeroFill;
    bool strict = false;
    bool aggregate_duplicates = false;
    std::map<std::string, std::string> categories;
};

inline std::map<std::string, std::string> read_categories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read categories file '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in).get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("categories file '" + path.string() + "': " + e.what());
    }
}

inline learn::ForestConfig forest_from_json(const nlohmann::json& j, learn::ForestConfig c = {}) {
    for (auto& [k, v] : j.items()) {
        if (k == "n_trees") c.n_trees = v.get<std::size_t>();
        else if (k == "max_depth") c.max_depth = v.get<std::size_t>();
        else if (k == "min_samples_leaf") c.min_samples_leaf = v.get<std::size_t>();
        else if (k == "features_per_split") c.features_per_split = v.get<std::size_t>();
        else if (k == "bootstrap") c.bootstrap = v.get<bool>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else throw ConfigError("unknown forest option '" + k + "'");
    }
    learn::validate(c, features::kFeatureCount);
    return c;
}

inline learn::LogisticConfig logistic_from_json(const nlohmann::json& j, learn::LogisticConfig c = {}) {
    for (auto& [k, v] : j.items()) {
        if (k == "learning_rate") c.learning_rate = v.get<double>();
        else if (k == "epochs") c.epochs = v.get<std::size_t>();
        else if (k == "l2") c.l2 = v.get<double>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else if (k == "standardize") c.standardize = v.get<bool>();
        else throw ConfigError("unknown logistic option '" + k + "'");
    }
    learn::validate(c);
    return c;
}

inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::set<std::string> known{"master_seed", "epa_types", "horizons",  "quantiles",
                                             "models",      "forest",    "logistic",  "fill_policy",
                                             "strict",      "aggregate_duplicates",   "categories"};
    for (auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown run config field '" + k + "'");

    RunConfig c;
    try {
        if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();

        std::vector<ActivityType> epa(kEpaTypes.begin(), kEpaTypes.end());
        std::vector<int> horizons(labeling::kHorizons.begin(), labeling::kHorizons.end());
        std::vector<int> quantiles(labeling::kQuantileCounts.begin(), labeling::kQuantileCounts.end());
        if (j.contains("epa_types")) {
            epa.clear();
            for (const auto& s : j.at("epa_types")) {
                auto t = parse_activity(s.get<std::string>());
                if (!t || !is_epa(*t)) throw ConfigError("not a commerce activity: " + s.dump());
                epa.push_back(*t);
            }
        }
        if (j.contains("horizons")) horizons = j.at("horizons").get<std::vector<int>>();
        if (j.contains("quantiles")) quantiles = j.at("quantiles").get<std::vector<int>>();
        c.tasks.clear();
        for (auto e : epa)
            for (int q : quantiles)
                for (int h : horizons) {
                    labeling::PredictionTask t{e, h, q};
                    labeling::validate(t);
                    c.tasks.push_back(t);
                }
        if (c.tasks.empty()) throw ConfigError("the task grid is empty");

        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j.at("models")) {
                auto k = learn::parse_model_kind(m.get<std::string>());
                if (std::find(c.models.begin(), c.models.end(), k) == c.models.end()) c.models.push_back(k);
            }
            if (c.models.empty()) throw ConfigError("no models selected");
        }
        if (j.contains("forest")) c.forest = forest_from_json(j.at("forest"));
        if (j.contains("logistic")) c.logistic = logistic_from_json(j.at("logistic"));
        if (j.contains("fill_policy")) {
            const auto f = j.at("fill_policy").get<std::string>();
            if (f == "zero") c.fill = FillPolicy::ZeroFill;
            else if (f == "strict") c.fill = FillPolicy::Strict;
            else throw ConfigError("fill_policy must be \"zero\" or \"strict\"");
        }
        if (j.contains("strict")) c.strict = j.at("strict").get<bool>();
        if (j.contains("aggregate_duplicates")) c.aggregate_duplicates = j.at("aggregate_duplicates").get<bool>();
        if (j.contains("categories")) {
            const auto& cat = j.at("categories");
            if (cat.is_string()) {
                std::filesystem::path p = cat.get<std::string>();
                c.categories = read_categories(p.is_absolute() ? p : base_dir / p);
            } else {
                c.categories = cat.get<std::map<std::string, std::string>>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return c;
}

// Everything that determines the results, in a stable order.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["master_seed"] = c.master_seed;
    auto& tasks = j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : c.tasks) tasks.push_back(labeling::describe(t));
    auto& models = j["models"] = nlohmann::ordered_json::array();
    for (auto m : c.models) models.push_back(std::string(learn::to_string(m)));
    j["forest"] = learn::to_json(c.forest);
    j["logistic"] = learn::to_json(c.logistic);
    j["fill_policy"] = c.fill == FillPolicy::ZeroFill ? "zero" : "strict";
    j["strict"] = c.strict;
    j["aggregate_duplicates"] = c.aggregate_duplicates;
    j["categories"] = c.categories;
    return j;
}

} // namespace smaepa
