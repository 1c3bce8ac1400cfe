#pragma once

// Trained classifiers behind one value type, with prediction, feature
// importance and a versioned JSON form that replays predictions exactly.

#include <algorithm>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "smaepa/features.hpp"
#include "smaepa/learn/forest.hpp"
#include "smaepa/learn/logistic.hpp"

namespace smaepa::learn {

enum class ModelKind { Forest, Logistic };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::Forest ? "forest" : "logistic"; }

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "forest" || s == "rf") return ModelKind::Forest;
    if (s == "logistic" || s == "lr") return ModelKind::Logistic;
    throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

inline constexpr int kModelFormatVersion = 1;

struct TrainingMetadata {
    nlohmann::ordered_json config;
    std::vector<std::size_t> class_counts;
    std::vector<int> missing_classes; // classes with no training rows
    std::optional<DateRange> data_range;
};

struct TrainedModel {
    ModelKind kind = ModelKind::Forest;
    int classes = 2;
    std::vector<std::string> feature_names;
    std::variant<ForestModel, LogisticModel> params;
    TrainingMetadata metadata;
};

struct Prediction {
    int label = 0;
    std::vector<double> probabilities;
};

inline nlohmann::ordered_json to_json(const ForestConfig& c) {
    return {{"n_trees", c.n_trees},           {"max_depth", c.max_depth}, {"min_samples_leaf", c.min_samples_leaf},
            {"features_per_split", c.features_per_split}, {"bootstrap", c.bootstrap}, {"seed", c.seed}};
}

inline nlohmann::ordered_json to_json(const LogisticConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"l2", c.l2},
            {"seed", c.seed},                   {"standardize", c.standardize}};
}

namespace detail {

inline std::vector<std::string> default_names(std::size_t d) {
    if (d == features::kFeatureCount) {
        const auto& n = features::feature_names();
        return {n.begin(), n.end()};
    }
    std::vector<std::string> out;
    for (std::size_t j = 0; j < d; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

inline TrainingMetadata metadata_for(const std::vector<int>& y, int q, nlohmann::ordered_json config) {
    TrainingMetadata m;
    m.config = std::move(config);
    m.class_counts.assign(static_cast<std::size_t>(q), 0);
    for (int label : y) ++m.class_counts[static_cast<std::size_t>(label)];
    for (int c = 0; c < q; ++c)
        if (m.class_counts[static_cast<std::size_t>(c)] == 0) m.missing_classes.push_back(c);
    return m;
}

inline int argmax_lowest(const std::vector<double>& p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

} // namespace detail

inline TrainedModel train_forest(const Matrix& x, const std::vector<int>& y, int q, const ForestConfig& cfg,
                                 std::vector<std::string> feature_names = {}) {
    TrainedModel m;
    m.kind = ModelKind::Forest;
    m.classes = q;
    m.params = fit_forest(x, y, q, cfg);
    m.feature_names = feature_names.empty() ? detail::default_names(x.cols()) : std::move(feature_names);
    m.metadata = detail::metadata_for(y, q, to_json(cfg));
    return m;
}

inline TrainedModel train_logistic(const Matrix& x, const std::vector<int>& y, int q, const LogisticConfig& cfg,
                                   std::vector<std::string> feature_names = {}) {
    TrainedModel m;
    m.kind = ModelKind::Logistic;
    m.classes = q;
    m.params = fit_logistic(x, y, q, cfg);
    m.feature_names = feature_names.empty() ? detail::default_names(x.cols()) : std::move(feature_names);
    m.metadata = detail::metadata_for(y, q, to_json(cfg));
    return m;
}

// Raw-row prediction; the caller guarantees the column order.
inline Prediction predict_row(const TrainedModel& m, std::span<const double> x) {
    if (x.size() != m.feature_names.size())
        throw DimensionError("expected " + std::to_string(m.feature_names.size()) + " features, got " +
                             std::to_string(x.size()));
    Prediction p;
    if (const auto* f = std::get_if<ForestModel>(&m.params)) {
        p.probabilities = forest_probabilities(*f, m.classes, x);
    } else {
        p.probabilities = logistic_probabilities(std::get<LogisticModel>(m.params), x);
    }
    p.label = detail::argmax_lowest(p.probabilities);
    return p;
}

inline Prediction predict(const TrainedModel& m, const features::FeatureVector& x) {
    const auto& names = features::FeatureVector::names();
    if (m.feature_names.size() != names.size() || !std::equal(names.begin(), names.end(), m.feature_names.begin()))
        throw DimensionError("model features do not match the canonical feature grid");
    return predict_row(m, x.values());
}

// Forest: normalized total Gini decrease. Logistic: summed |standardized weight|.
inline std::vector<double> feature_importance(const TrainedModel& m) {
    if (const auto* f = std::get_if<ForestModel>(&m.params)) return forest_importance(*f);
    return logistic_importance(std::get<LogisticModel>(m.params));
}

// ---- JSON -------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json node_json(const Tree& t, int id) {
    const auto& n = t.nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return {{"leaf", {{"class", n.label}, {"counts", n.class_counts}}}};
    nlohmann::ordered_json j;
    j["split"] = {{"feature", n.feature}, {"threshold", n.threshold}, {"class", n.label}};
    j["left"] = node_json(t, n.left);
    j["right"] = node_json(t, n.right);
    return j;
}

inline int node_from_json(Tree& t, const nlohmann::json& j) {
    const auto id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    if (j.contains("leaf")) {
        auto& n = t.nodes.back();
        n.label = j.at("leaf").at("class").get<int>();
        n.class_counts = j.at("leaf").at("counts").get<std::vector<double>>();
        return id;
    }
    const auto& s = j.at("split");
    const int l = node_from_json(t, j.at("left"));
    const int r = node_from_json(t, j.at("right"));
    auto& n = t.nodes[static_cast<std::size_t>(id)];
    n.feature = s.at("feature").get<int>();
    n.threshold = s.at("threshold").get<double>();
    n.label = s.at("class").get<int>();
    n.left = l;
    n.right = r;
    return id;
}

} // namespace detail

inline nlohmann::ordered_json to_json(const TrainedModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "smaepa-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(m.kind));
    j["classes"] = m.classes;
    j["feature_names"] = m.feature_names;
    auto& meta = j["metadata"];
    meta["config"] = m.metadata.config;
    meta["class_counts"] = m.metadata.class_counts;
    meta["missing_classes"] = m.metadata.missing_classes;
    if (m.metadata.data_range) {
        meta["data_range"] = {{"start", format_date(m.metadata.data_range->start)},
                              {"end", format_date(m.metadata.data_range->end)}};
    }
    if (const auto* f = std::get_if<ForestModel>(&m.params)) {
        auto& trees = j["trees"] = nlohmann::ordered_json::array();
        for (const auto& t : f->trees) trees.push_back(detail::node_json(t, 0));
        j["impurity_decrease"] = f->impurity_decrease;
    } else {
        const auto& l = std::get<LogisticModel>(m.params);
        auto& w = j["weights"] = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < l.classes; ++c)
            w.push_back(std::vector<double>(l.weights.begin() + static_cast<std::ptrdiff_t>(c * l.features),
                                            l.weights.begin() + static_cast<std::ptrdiff_t>((c + 1) * l.features)));
        j["bias"] = l.bias;
        j["mean"] = l.mean;
        j["scale"] = l.scale;
    }
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "smaepa-model") throw SchemaError("not a model file");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw SchemaError("unsupported model version " + j.at("version").dump());
        TrainedModel m;
        m.kind = parse_model_kind(j.at("kind").get<std::string>());
        m.classes = j.at("classes").get<int>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& meta = j.at("metadata");
        m.metadata.config = meta.at("config");
        m.metadata.class_counts = meta.at("class_counts").get<std::vector<std::size_t>>();
        m.metadata.missing_classes = meta.at("missing_classes").get<std::vector<int>>();
        if (meta.contains("data_range")) {
            auto s = parse_date(meta.at("data_range").at("start").get<std::string>());
            auto e = parse_date(meta.at("data_range").at("end").get<std::string>());
            if (!s || !e) throw SchemaError("bad data_range");
            m.metadata.data_range = DateRange(*s, *e);
        }
        if (m.kind == ModelKind::Forest) {
            ForestModel f;
            for (const auto& t : j.at("trees")) {
                Tree tree;
                detail::node_from_json(tree, t);
                f.trees.push_back(std::move(tree));
            }
            f.impurity_decrease = j.at("impurity_decrease").get<std::vector<double>>();
            m.params = std::move(f);
        } else {
            LogisticModel l;
            l.classes = static_cast<std::size_t>(m.classes);
            l.features = m.feature_names.size();
            for (const auto& row : j.at("weights")) {
                auto r = row.get<std::vector<double>>();
                l.weights.insert(l.weights.end(), r.begin(), r.end());
            }
            l.bias = j.at("bias").get<std::vector<double>>();
            l.mean = j.at("mean").get<std::vector<double>>();
            l.scale = j.at("scale").get<std::vector<double>>();
            if (l.weights.size() != l.classes * l.features) throw SchemaError("weight matrix shape mismatch");
            m.params = std::move(l);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed model JSON: ") + e.what());
    }
}

} // namespace smaepa::learn
