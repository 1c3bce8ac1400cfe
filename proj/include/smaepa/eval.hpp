#pragma once

// Sliding temporal cross-validation and the metrics collected per fold.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "smaepa/core.hpp"
#include "smaepa/features.hpp"
#include "smaepa/labeling.hpp"
#include "smaepa/learn/model.hpp"
#include "smaepa/rng.hpp"
#include "smaepa/stats.hpp"

namespace smaepa::eval {

inline constexpr int kFolds = 12;
inline constexpr int kTrainMonths = 12;

// ---- folds ------------------------------------------------------------------

struct FoldSpec {
    int index = 1; // 1-based
    DateRange train;
    DateRange test;
};

namespace detail {

inline std::chrono::year_month month_of(Date d) {
    std::chrono::year_month_day ymd{d};
    return ymd.year() / ymd.month();
}

inline Date first_day(std::chrono::year_month ym) { return Date{ym / std::chrono::day{1}}; }
inline Date last_day(std::chrono::year_month ym) { return Date{ym / std::chrono::last}; }

} // namespace detail

// Fold i trains on calendar months i..i+11 of the range and tests on month
// i+12. Only whole calendar months inside the range count.
inline std::vector<FoldSpec> make_folds(const DateRange& range, int folds = kFolds, int train_months = kTrainMonths) {
    using namespace std::chrono;
    year_month first = detail::month_of(range.start);
    if (detail::first_day(first) != range.start) first += months{1};
    year_month last = detail::month_of(range.end);
    if (detail::last_day(last) != range.end) last -= months{1};
    const auto whole = (last - first).count() + 1;
    if (whole < train_months + folds) {
        throw RangeError("temporal cross-validation needs " + std::to_string(train_months + folds) +
                         " whole calendar months; " + format_date(range.start) + ".." + format_date(range.end) +
                         " has " + std::to_string(std::max<long>(whole, 0)));
    }
    std::vector<FoldSpec> out;
    for (int i = 0; i < folds; ++i) {
        const year_month train_first = first + months{i};
        const year_month test_month = train_first + months{train_months};
        out.push_back({i + 1, DateRange(detail::first_day(train_first), detail::last_day(test_month - months{1})),
                       DateRange(detail::first_day(test_month), detail::last_day(test_month))});
    }
    return out;
}

// ---- metrics ----------------------------------------------------------------

struct ClassMetrics {
    std::optional<double> precision; // undefined when the class was never predicted
    std::optional<double> recall;    // undefined when the class never occurs
    std::optional<double> f1;
};

struct ConfusionMetrics {
    int q = 0;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted]
    std::vector<ClassMetrics> per_class;
    std::size_t n_test = 0;

    std::size_t precision_coverage() const {
        return static_cast<std::size_t>(
            std::count_if(per_class.begin(), per_class.end(), [](const ClassMetrics& c) { return c.precision.has_value(); }));
    }
    double accuracy() const {
        std::size_t hit = 0;
        for (int c = 0; c < q; ++c) hit += confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        return n_test ? static_cast<double>(hit) / static_cast<double>(n_test) : 0.0;
    }
};

inline ConfusionMetrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted, int q) {
    if (truth.size() != predicted.size()) throw DimensionError("compute_metrics: label vectors differ in length");
    const auto uq = static_cast<std::size_t>(q);
    ConfusionMetrics m;
    m.q = q;
    m.n_test = truth.size();
    m.confusion.assign(uq, std::vector<std::size_t>(uq, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= q || predicted[i] < 0 || predicted[i] >= q)
            throw DimensionError("compute_metrics: label outside 0.." + std::to_string(q - 1));
        ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    }
    m.per_class.resize(uq);
    for (std::size_t c = 0; c < uq; ++c) {
        std::size_t col = 0, row = 0;
        for (std::size_t k = 0; k < uq; ++k) {
            col += m.confusion[k][c];
            row += m.confusion[c][k];
        }
        const auto tp = static_cast<double>(m.confusion[c][c]);
        auto& cm = m.per_class[c];
        if (col > 0) cm.precision = tp / static_cast<double>(col);
        if (row > 0) cm.recall = tp / static_cast<double>(row);
        if (cm.precision && cm.recall) {
            const double s = *cm.precision + *cm.recall;
            cm.f1 = s > 0.0 ? 2.0 * *cm.precision * *cm.recall / s : 0.0;
        }
    }
    return m;
}

// Ranks 1..n by descending value; tied values share the mean of their positions.
inline std::vector<double> rank_descending(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// ---- fold evaluation --------------------------------------------------------

struct ModelSpec {
    learn::ModelKind kind = learn::ModelKind::Forest;
    learn::ForestConfig forest;
    learn::LogisticConfig logistic;
};

struct FoldResult {
    int fold_index = 0;
    learn::ModelKind kind = learn::ModelKind::Forest;
    ConfusionMetrics metrics;
    std::vector<double> thresholds;
    bool sparse_class = false;
    std::size_t n_train = 0;
    std::vector<double> importance;       // in memory only
    std::vector<double> importance_ranks; // 1 = most important
};

// Throws LeakageError if any example reads commerce data outside its range.
inline void assert_no_leakage(const FoldSpec& fold, const labeling::Dataset& train, const labeling::Dataset& test,
                              int horizon) {
    if (!(fold.train.end < fold.test.start)) throw LeakageError("training range overlaps the test range");
    auto check = [&](const labeling::Dataset& d, const DateRange& r, const char* what) {
        for (const auto& ex : d.examples) {
            const Date first = add_days(ex.t_p, labeling::kTargetStartOffset);
            const Date last = add_days(ex.t_p, horizon);
            if (!r.contains(ex.t_p) || !r.contains(first) || !r.contains(last))
                throw LeakageError(std::string(what) + " example at " + format_date(ex.t_p) + " reads targets outside " +
                                   format_date(r.start) + ".." + format_date(r.end));
        }
    };
    check(train, fold.train, "training");
    check(test, fold.test, "test");
}

inline FoldResult evaluate_fold(const VendorPanel& panel, const labeling::PredictionTask& task, const FoldSpec& fold,
                                const ModelSpec& spec) {
    auto train = labeling::build_dataset(panel, task, fold.train);
    auto test = labeling::build_dataset(panel, task, fold.test, train.scheme);
    assert_no_leakage(fold, train, test, task.horizon_days);

    const auto ts = learn::to_training_set(train.examples);
    auto model = spec.kind == learn::ModelKind::Forest ? learn::train_forest(ts.x, ts.y, task.q, spec.forest)
                                                       : learn::train_logistic(ts.x, ts.y, task.q, spec.logistic);
    model.metadata.data_range = fold.train;

    std::vector<int> truth, predicted;
    truth.reserve(test.examples.size());
    predicted.reserve(test.examples.size());
    for (const auto& ex : test.examples) {
        truth.push_back(ex.label);
        predicted.push_back(learn::predict(model, ex.features).label);
    }

    FoldResult r;
    r.fold_index = fold.index;
    r.kind = spec.kind;
    r.metrics = compute_metrics(truth, predicted, task.q);
    r.thresholds = train.scheme.thresholds();
    r.sparse_class = train.scheme.has_sparse_class();
    r.n_train = train.examples.size();
    r.importance = learn::feature_importance(model);
    r.importance_ranks = rank_descending(r.importance);
    return r;
}

// ---- feature ranks ----------------------------------------------------------

struct MeanRank {
    std::vector<std::pair<std::string, double>> ranked; // ascending mean rank
    bool from_logistic_weights = false;
};

// Mean per-feature rank across folds. Forest folds are used when present;
// otherwise logistic |weight| ranks, flagged as such.
inline MeanRank mean_rank_importance(const std::vector<const FoldResult*>& folds) {
    if (folds.empty()) throw InsufficientData("mean_rank_importance: no fold results");
    const bool any_forest = std::any_of(folds.begin(), folds.end(),
                                        [](const FoldResult* f) { return f->kind == learn::ModelKind::Forest; });
    const auto& names = features::feature_names();
    std::vector<double> sum(names.size(), 0.0);
    std::size_t used = 0;
    for (const auto* f : folds) {
        if (any_forest && f->kind != learn::ModelKind::Forest) continue;
        if (f->importance_ranks.size() != names.size()) throw DimensionError("fold result lacks 66 feature ranks");
        for (std::size_t j = 0; j < names.size(); ++j) sum[j] += f->importance_ranks[j];
        ++used;
    }
    MeanRank out;
    out.from_logistic_weights = !any_forest;
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sum[a] < sum[b]; });
    for (auto j : order) out.ranked.emplace_back(names[j], sum[j] / static_cast<double>(used));
    return out;
}

inline MeanRank mean_rank_importance(const std::vector<FoldResult>& folds) {
    std::vector<const FoldResult*> ptrs;
    for (const auto& f : folds) ptrs.push_back(&f);
    return mean_rank_importance(ptrs);
}

inline double random_baseline(int q) {
    if (q < 2) throw ConfigError("random_baseline: q must be at least 2");
    return 1.0 / static_cast<double>(q);
}

// ---- experiment -------------------------------------------------------------

struct ExperimentConfig {
    std::uint64_t master_seed = 0;
    learn::ForestConfig forest;
    learn::LogisticConfig logistic;
    std::size_t threads = 1;
};

struct UnitResult {
    std::string vendor;
    std::string category;
    labeling::PredictionTask task;
    learn::ModelKind kind = learn::ModelKind::Forest;
    std::vector<FoldResult> folds;
    std::optional<std::string> error;

    // Mean over folds of the defined precisions of class c.
    std::optional<double> mean_precision(int c) const {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& f : folds) {
            const auto& p = f.metrics.per_class[static_cast<std::size_t>(c)].precision;
            if (p) {
                s += *p;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return s / static_cast<double>(n);
    }
    std::size_t precision_coverage(int c) const {
        std::size_t n = 0;
        for (const auto& f : folds) n += f.metrics.per_class[static_cast<std::size_t>(c)].precision ? 1 : 0;
        return n;
    }
};

struct ExperimentReport {
    std::uint64_t master_seed = 0;
    std::vector<labeling::PredictionTask> tasks;
    std::vector<learn::ModelKind> kinds;
    std::vector<std::string> vendors;
    nlohmann::ordered_json model_configs;
    std::vector<UnitResult> units; // kind-major, then vendor, then task

    bool partial() const {
        return std::any_of(units.begin(), units.end(), [](const UnitResult& u) { return u.error.has_value(); });
    }
    std::size_t units_for(learn::ModelKind k) const {
        return static_cast<std::size_t>(
            std::count_if(units.begin(), units.end(), [&](const UnitResult& u) { return u.kind == k; }));
    }
    std::size_t failed_units() const {
        return static_cast<std::size_t>(
            std::count_if(units.begin(), units.end(), [](const UnitResult& u) { return u.error.has_value(); }));
    }
};

inline std::uint64_t unit_seed(std::uint64_t master, const std::string& vendor, const labeling::PredictionTask& t,
                               int fold) {
    return rng::derive({master, rng::fnv1a(vendor), static_cast<std::uint64_t>(index_of(t.epa_type)),
                        static_cast<std::uint64_t>(t.horizon_days), static_cast<std::uint64_t>(t.q),
                        static_cast<std::uint64_t>(fold)});
}

inline UnitResult evaluate_unit(const VendorPanel& panel, const labeling::PredictionTask& task, learn::ModelKind kind,
                                const ExperimentConfig& cfg) {
    UnitResult u{panel.vendor_id(), panel.category(), task, kind, {}, std::nullopt};
    try {
        for (const auto& fold : make_folds(panel.range())) {
            ModelSpec spec{kind, cfg.forest, cfg.logistic};
            const auto seed = unit_seed(cfg.master_seed, panel.vendor_id(), task, fold.index);
            spec.forest.seed = seed;
            spec.logistic.seed = seed;
            u.folds.push_back(evaluate_fold(panel, task, fold, spec));
        }
    } catch (const LeakageError&) {
        throw;
    } catch (const std::exception& e) {
        u.folds.clear();
        u.error = e.what();
    }
    return u;
}

// Evaluates every (model kind, vendor, task) unit over 12 folds. Units run on
// up to cfg.threads workers; the result never depends on the thread count.
inline ExperimentReport run_experiment(const std::vector<VendorPanel>& panels,
                                       const std::vector<labeling::PredictionTask>& tasks,
                                       const std::vector<learn::ModelKind>& kinds, const ExperimentConfig& cfg) {
    ExperimentReport report;
    report.master_seed = cfg.master_seed;
    report.tasks = tasks;
    report.kinds = kinds;
    for (const auto& p : panels) report.vendors.push_back(p.vendor_id());
    for (auto k : kinds) {
        report.model_configs[std::string(learn::to_string(k))] =
            k == learn::ModelKind::Forest ? learn::to_json(cfg.forest) : learn::to_json(cfg.logistic);
    }

    struct Job {
        std::size_t panel, task;
        learn::ModelKind kind;
    };
    std::vector<Job> jobs;
    for (auto k : kinds)
        for (std::size_t p = 0; p < panels.size(); ++p)
            for (std::size_t t = 0; t < tasks.size(); ++t) jobs.push_back({p, t, k});

    report.units.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                report.units[i] = evaluate_unit(panels[jobs[i].panel], tasks[jobs[i].task], jobs[i].kind, cfg);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(cfg.threads, jobs.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return report;
}

} // namespace smaepa::eval
