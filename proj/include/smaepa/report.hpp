#pragma once

// Aggregation of experiment results by vendor category, RF-vs-LR significance,
// the tabular CSV exports and the full JSON report (which can be read back).

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "smaepa/eval.hpp"
#include "smaepa/format.hpp"

namespace smaepa::report {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& default_categories() {
    static const std::vector<std::string> c{"P/E", "Sports", "Food", "Clothes", "Home"};
    return c;
}

inline constexpr const char* kUncategorized = "Uncategorized";

// Table rows list commerce types in this order.
inline constexpr std::array<ActivityType, 3> kTableEpaOrder{ActivityType::Order, ActivityType::Clickthrough,
                                                           ActivityType::Search};

inline std::string category_of(const eval::UnitResult& u) { return u.category.empty() ? kUncategorized : u.category; }

// Default categories first, then any others seen in the report, sorted.
inline std::vector<std::string> categories(const eval::ExperimentReport& r) {
    std::vector<std::string> out = default_categories();
    std::set<std::string> extra;
    for (const auto& u : r.units) {
        auto c = category_of(u);
        if (std::find(out.begin(), out.end(), c) == out.end()) extra.insert(c);
    }
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

// "0-20%", "20%-40%", ... ; "0-33%", "33%-66%", "66%-100%" for q=3.
inline std::string quantile_label(int c, int q) {
    const int lo = c * 100 / q;
    const int hi = c + 1 == q ? 100 : (c + 1) * 100 / q;
    return (c == 0 ? std::string("0") : std::to_string(lo) + "%") + "-" + std::to_string(hi) + "%";
}

struct CellStats {
    std::optional<double> avg, max, min;
    std::size_t vendors = 0;
};

// AVG/MAX/MIN over vendors of each vendor's fold-mean precision for class c.
// An empty category string selects every vendor.
inline CellStats precision_stats(const eval::ExperimentReport& r, learn::ModelKind kind,
                                 const labeling::PredictionTask& task, int c, const std::string& category = {}) {
    CellStats s;
    double sum = 0.0;
    for (const auto& u : r.units) {
        if (u.kind != kind || u.task != task || u.error) continue;
        if (!category.empty() && category_of(u) != category) continue;
        auto p = u.mean_precision(c);
        if (!p) continue;
        ++s.vendors;
        sum += *p;
        s.max = s.max ? std::max(*s.max, *p) : *p;
        s.min = s.min ? std::min(*s.min, *p) : *p;
    }
    if (s.vendors) s.avg = sum / static_cast<double>(s.vendors);
    return s;
}

// ---- significance -----------------------------------------------------------

struct Significance {
    std::string scope; // "task" or "class"
    std::optional<ActivityType> epa_type;
    int q = 0;
    std::optional<int> horizon;
    std::optional<int> label;
    stats::TTestResult test;
};

// Paired forest-minus-logistic precision, matched by (vendor, fold, class).
inline std::vector<Significance> significance(const eval::ExperimentReport& r) {
    std::vector<Significance> out;
    const bool both = std::count(r.kinds.begin(), r.kinds.end(), learn::ModelKind::Forest) &&
                      std::count(r.kinds.begin(), r.kinds.end(), learn::ModelKind::Logistic);
    if (!both) return out;

    using Key = std::pair<std::string, std::size_t>; // vendor, task index
    std::map<Key, const eval::UnitResult*> forest, logistic;
    auto task_index = [&](const labeling::PredictionTask& t) {
        return static_cast<std::size_t>(std::find(r.tasks.begin(), r.tasks.end(), t) - r.tasks.begin());
    };
    for (const auto& u : r.units) {
        if (u.error) continue;
        (u.kind == learn::ModelKind::Forest ? forest : logistic)[{u.vendor, task_index(u.task)}] = &u;
    }

    std::map<std::pair<int, int>, std::pair<std::vector<double>, std::vector<double>>> by_class;
    for (std::size_t ti = 0; ti < r.tasks.size(); ++ti) {
        const auto& task = r.tasks[ti];
        std::vector<double> a, b;
        for (const auto& vendor : r.vendors) {
            auto f = forest.find({vendor, ti});
            auto l = logistic.find({vendor, ti});
            if (f == forest.end() || l == logistic.end()) continue;
            const auto folds = std::min(f->second->folds.size(), l->second->folds.size());
            for (std::size_t k = 0; k < folds; ++k) {
                for (int c = 0; c < task.q; ++c) {
                    const auto& pf = f->second->folds[k].metrics.per_class[static_cast<std::size_t>(c)].precision;
                    const auto& pl = l->second->folds[k].metrics.per_class[static_cast<std::size_t>(c)].precision;
                    if (!pf || !pl) continue;
                    a.push_back(*pf);
                    b.push_back(*pl);
                    by_class[{task.q, c}].first.push_back(*pf);
                    by_class[{task.q, c}].second.push_back(*pl);
                }
            }
        }
        if (a.size() >= 2)
            out.push_back({"task", task.epa_type, task.q, task.horizon_days, std::nullopt, stats::paired_t_test(a, b)});
    }
    for (const auto& [key, samples] : by_class) {
        if (samples.first.size() >= 2)
            out.push_back({"class", std::nullopt, key.first, std::nullopt, key.second,
                           stats::paired_t_test(samples.first, samples.second)});
    }
    return out;
}

// ---- tables -----------------------------------------------------------------

// 5-quantile next-day precision by category: AVG/MAX/MIN per quantile.
inline std::string table_quantile_stats(const eval::ExperimentReport& r, learn::ModelKind kind, int q = 5,
                                        int horizon = 1) {
    std::ostringstream out;
    out << "epa_type,category";
    for (int c = 0; c < q; ++c) {
        const auto l = quantile_label(c, q);
        out << ',' << l << "_AVG," << l << "_MAX," << l << "_MIN";
    }
    out << '\n';
    for (auto e : kTableEpaOrder) {
        for (const auto& cat : categories(r)) {
            out << to_string(e) << ',' << cat;
            for (int c = 0; c < q; ++c) {
                const auto s = precision_stats(r, kind, {e, horizon, q}, c, cat);
                out << ',' << format_real(s.avg) << ',' << format_real(s.max) << ',' << format_real(s.min);
            }
            out << '\n';
        }
    }
    return out.str();
}

// 3-quantile average precision by category with one column per horizon.
inline std::string table_horizons(const eval::ExperimentReport& r, learn::ModelKind kind, int q = 3) {
    std::ostringstream out;
    out << "epa_type,category";
    for (int c = 0; c < q; ++c)
        for (int h : labeling::kHorizons) out << ',' << quantile_label(c, q) << '_' << h << 'D';
    out << '\n';
    auto row = [&](ActivityType e, const std::string& label, const std::string& cat) {
        out << to_string(e) << ',' << label;
        for (int c = 0; c < q; ++c)
            for (int h : labeling::kHorizons) out << ',' << format_real(precision_stats(r, kind, {e, h, q}, c, cat).avg);
        out << '\n';
    };
    for (auto e : kTableEpaOrder) {
        for (const auto& cat : categories(r)) row(e, cat, cat);
        row(e, "AVG", {});
    }
    return out.str();
}

// Top mean-rank features of the 3-quantile next-day forests, one column per commerce type.
inline std::string table_top_features(const eval::ExperimentReport& r, std::size_t top = 10, int q = 3,
                                      int horizon = 1) {
    std::array<std::vector<std::pair<std::string, double>>, 3> cols;
    for (std::size_t i = 0; i < kTableEpaOrder.size(); ++i) {
        std::vector<const eval::FoldResult*> folds;
        const labeling::PredictionTask task{kTableEpaOrder[i], horizon, q};
        for (const auto& u : r.units)
            if (u.kind == learn::ModelKind::Forest && u.task == task && !u.error)
                for (const auto& f : u.folds) folds.push_back(&f);
        if (!folds.empty()) cols[i] = eval::mean_rank_importance(folds).ranked;
    }
    std::ostringstream out;
    out << "rank";
    for (auto e : kTableEpaOrder) out << ',' << to_string(e);
    out << '\n';
    for (std::size_t k = 0; k < top; ++k) {
        out << k + 1;
        for (const auto& c : cols) out << ',' << (k < c.size() ? c[k].first : std::string{});
        out << '\n';
    }
    return out.str();
}

// ---- JSON -------------------------------------------------------------------

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json task_json(const labeling::PredictionTask& t) {
    return {{"epa_type", std::string(to_string(t.epa_type))}, {"horizon", t.horizon_days}, {"q", t.q}};
}

inline Json fold_json(const eval::FoldResult& f) {
    Json j;
    j["fold"] = f.fold_index;
    j["n_train"] = f.n_train;
    j["n_test"] = f.metrics.n_test;
    j["thresholds"] = f.thresholds;
    j["sparse_class"] = f.sparse_class;
    j["confusion"] = f.metrics.confusion;
    Json p = Json::array(), rc = Json::array(), f1 = Json::array();
    for (const auto& c : f.metrics.per_class) {
        p.push_back(opt(c.precision));
        rc.push_back(opt(c.recall));
        f1.push_back(opt(c.f1));
    }
    j["precision"] = std::move(p);
    j["recall"] = std::move(rc);
    j["f1"] = std::move(f1);
    j["precision_coverage"] = f.metrics.precision_coverage();
    j["importance_ranks"] = f.importance_ranks;
    return j;
}

inline Json to_json(const eval::ExperimentReport& r) {
    Json j;
    j["format"] = "smaepa-experiment";
    j["version"] = 1;
    j["master_seed"] = r.master_seed;
    j["model_configs"] = r.model_configs;
    j["feature_names"] = features::feature_names();
    auto& tasks = j["tasks"] = Json::array();
    for (const auto& t : r.tasks) tasks.push_back(task_json(t));
    auto& kinds = j["models"] = Json::array();
    for (auto k : r.kinds) kinds.push_back(std::string(learn::to_string(k)));
    j["vendors"] = r.vendors;
    j["partial"] = r.partial();
    j["failed_units"] = r.failed_units();
    auto& counts = j["units_per_model"] = Json::object();
    for (auto k : r.kinds) counts[std::string(learn::to_string(k))] = r.units_for(k);

    auto& baselines = j["random_baselines"] = Json::object();
    for (int q : labeling::kQuantileCounts) baselines[std::to_string(q)] = eval::random_baseline(q);

    auto& units = j["units"] = Json::array();
    for (const auto& u : r.units) {
        Json ju;
        ju["vendor"] = u.vendor;
        ju["category"] = u.category;
        ju["task"] = task_json(u.task);
        ju["model"] = std::string(learn::to_string(u.kind));
        ju["error"] = u.error ? Json(*u.error) : Json(nullptr);
        Json mp = Json::array(), cov = Json::array();
        for (int c = 0; c < u.task.q; ++c) {
            mp.push_back(u.error ? Json(nullptr) : opt(u.mean_precision(c)));
            cov.push_back(u.error ? 0 : u.precision_coverage(c));
        }
        ju["mean_precision"] = std::move(mp);
        ju["precision_coverage"] = std::move(cov);
        auto& folds = ju["folds"] = Json::array();
        for (const auto& f : u.folds) folds.push_back(fold_json(f));
        units.push_back(std::move(ju));
    }

    auto& agg = j["aggregates"] = Json::array();
    auto cats = categories(r);
    for (auto k : r.kinds) {
        for (const auto& t : r.tasks) {
            for (int c = 0; c < t.q; ++c) {
                auto emit = [&](const std::string& label, const std::string& cat) {
                    auto s = precision_stats(r, k, t, c, cat);
                    Json a = task_json(t);
                    a["model"] = std::string(learn::to_string(k));
                    a["class"] = c;
                    a["category"] = label;
                    a["avg"] = opt(s.avg);
                    a["max"] = opt(s.max);
                    a["min"] = opt(s.min);
                    a["vendors"] = s.vendors;
                    agg.push_back(std::move(a));
                };
                for (const auto& cat : cats) emit(cat, cat);
                emit("ALL", {});
            }
        }
    }

    auto& sig = j["significance"] = Json::array();
    for (const auto& s : significance(r)) {
        Json x;
        x["scope"] = s.scope;
        x["epa_type"] = s.epa_type ? Json(std::string(to_string(*s.epa_type))) : Json(nullptr);
        x["q"] = s.q;
        x["horizon"] = s.horizon ? Json(*s.horizon) : Json(nullptr);
        x["class"] = s.label ? Json(*s.label) : Json(nullptr);
        x["n"] = s.test.n;
        x["mean_difference"] = s.test.mean_difference;
        x["t"] = std::isfinite(s.test.t) ? Json(s.test.t) : Json(s.test.t > 0 ? "inf" : "-inf");
        x["p"] = s.test.p;
        x["degenerate_variance"] = s.test.degenerate_variance;
        sig.push_back(std::move(x));
    }
    return j;
}

namespace detail {

inline std::optional<double> opt_from(const nlohmann::json& v) {
    return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

inline labeling::PredictionTask task_from(const nlohmann::json& j) {
    auto e = parse_activity(j.at("epa_type").get<std::string>());
    if (!e || !is_epa(*e)) throw SchemaError("bad epa_type in report");
    return {*e, j.at("horizon").get<int>(), j.at("q").get<int>()};
}

} // namespace detail

// Rebuilds the fold-level content of a report written by to_json.
inline eval::ExperimentReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "smaepa-experiment") throw SchemaError("not an experiment report");
        eval::ExperimentReport r;
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.model_configs = j.at("model_configs");
        for (const auto& t : j.at("tasks")) r.tasks.push_back(detail::task_from(t));
        for (const auto& k : j.at("models")) r.kinds.push_back(learn::parse_model_kind(k.get<std::string>()));
        r.vendors = j.at("vendors").get<std::vector<std::string>>();
        for (const auto& ju : j.at("units")) {
            eval::UnitResult u;
            u.vendor = ju.at("vendor").get<std::string>();
            u.category = ju.at("category").get<std::string>();
            u.task = detail::task_from(ju.at("task"));
            u.kind = learn::parse_model_kind(ju.at("model").get<std::string>());
            if (!ju.at("error").is_null()) u.error = ju.at("error").get<std::string>();
            for (const auto& jf : ju.at("folds")) {
                eval::FoldResult f;
                f.fold_index = jf.at("fold").get<int>();
                f.kind = u.kind;
                f.n_train = jf.at("n_train").get<std::size_t>();
                f.thresholds = jf.at("thresholds").get<std::vector<double>>();
                f.sparse_class = jf.at("sparse_class").get<bool>();
                f.metrics.q = u.task.q;
                f.metrics.n_test = jf.at("n_test").get<std::size_t>();
                f.metrics.confusion = jf.at("confusion").get<std::vector<std::vector<std::size_t>>>();
                const auto& p = jf.at("precision");
                const auto& rc = jf.at("recall");
                const auto& f1 = jf.at("f1");
                for (std::size_t c = 0; c < p.size(); ++c)
                    f.metrics.per_class.push_back(
                        {detail::opt_from(p[c]), detail::opt_from(rc[c]), detail::opt_from(f1[c])});
                f.importance_ranks = jf.at("importance_ranks").get<std::vector<double>>();
                u.folds.push_back(std::move(f));
            }
            r.units.push_back(std::move(u));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed experiment report: ") + e.what());
    }
}

// Plain-text per-category summary of top/bottom quantile precision next to the
// random baseline, for terminal output.
inline std::string summary_text(const eval::ExperimentReport& r) {
    std::ostringstream out;
    out << "units per model:";
    for (auto k : r.kinds) out << ' ' << learn::to_string(k) << '=' << r.units_for(k);
    out << "  failed=" << r.failed_units() << '\n';
    for (auto k : r.kinds) {
        for (int q : labeling::kQuantileCounts) {
            const bool present = std::any_of(r.tasks.begin(), r.tasks.end(),
                                             [&](const labeling::PredictionTask& t) { return t.q == q && t.horizon_days == 1; });
            if (!present) continue;
            out << learn::to_string(k) << " next-day " << q << "-q (random baseline " << format_real(eval::random_baseline(q))
                << ")\n";
            for (auto e : kTableEpaOrder) {
                if (std::find(r.tasks.begin(), r.tasks.end(), labeling::PredictionTask{e, 1, q}) == r.tasks.end())
                    continue;
                out << "  " << to_string(e) << ':';
                for (const auto& cat : categories(r)) {
                    auto lo = precision_stats(r, k, {e, 1, q}, 0, cat);
                    auto hi = precision_stats(r, k, {e, 1, q}, q - 1, cat);
                    if (!lo.vendors && !hi.vendors) continue;
                    out << "  " << cat << " bottom=" << format_real(lo.avg) << " top=" << format_real(hi.avg);
                }
                out << '\n';
            }
        }
    }
    return out.str();
}

} // namespace smaepa::report
