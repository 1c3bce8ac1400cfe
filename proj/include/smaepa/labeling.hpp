#pragma once

// Cumulative commerce targets and their quantile class labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "smaepa/core.hpp"
#include "smaepa/features.hpp"
#include "smaepa/format.hpp"

namespace smaepa::labeling {

// The target sums days t_p + kTargetStartOffset .. t_p + h.
inline constexpr std::int64_t kTargetStartOffset = 1;

inline constexpr std::array<int, 3> kHorizons{1, 3, 7};
inline constexpr std::array<int, 3> kQuantileCounts{2, 3, 5};

// Classes holding less than this share of the training targets are flagged.
inline constexpr double kSparseClassShare = 0.05;

struct PredictionTask {
    ActivityType epa_type = ActivityType::Order;
    int horizon_days = 1;
    int q = 2;

    friend bool operator==(const PredictionTask&, const PredictionTask&) = default;
};

inline void validate(const PredictionTask& t) {
    if (!is_epa(t.epa_type)) throw ConfigError("prediction target must be a commerce activity");
    if (std::find(kHorizons.begin(), kHorizons.end(), t.horizon_days) == kHorizons.end())
        throw ConfigError("horizon must be 1, 3 or 7 days");
    if (std::find(kQuantileCounts.begin(), kQuantileCounts.end(), t.q) == kQuantileCounts.end())
        throw ConfigError("quantile count must be 2, 3 or 5");
}

inline std::string describe(const PredictionTask& t) {
    return std::string(to_string(t.epa_type)) + "/h" + std::to_string(t.horizon_days) + "/q" + std::to_string(t.q);
}

// Search, Clickthrough, Order x q in {2,3,5} x h in {1,3,7}: 27 tasks.
inline std::vector<PredictionTask> full_task_grid() {
    std::vector<PredictionTask> out;
    for (auto e : kEpaTypes)
        for (int q : kQuantileCounts)
            for (int h : kHorizons) out.push_back({e, h, q});
    return out;
}

inline double cumulative_target(const DailySeries& series, Date t_p, int horizon) {
    if (horizon < 1) throw RangeError("horizon must be at least one day");
    const Date first = add_days(t_p, kTargetStartOffset);
    const Date last = add_days(t_p, horizon);
    if (!series.covers(first) || !series.covers(last)) {
        throw RangeError("target window " + format_date(first) + ".." + format_date(last) + " exceeds the data (" +
                         format_date(series.start()) + ".." + format_date(series.end()) + ")");
    }
    double total = 0.0;
    for (auto v : series.values().subspan(series.index_of(first), series.index_of(last) - series.index_of(first) + 1))
        total += static_cast<double>(v);
    return total;
}

class QuantileScheme {
public:
    QuantileScheme(int q, std::vector<double> thresholds, std::optional<DateRange> fitted_on = std::nullopt,
                   std::size_t n_train = 0, std::vector<double> class_share = {})
        : q_(q), thresholds_(std::move(thresholds)), fitted_on_(fitted_on), n_train_(n_train),
          class_share_(std::move(class_share)) {
        if (q_ < 2) throw ConfigError("quantile count must be at least 2");
        if (thresholds_.size() != static_cast<std::size_t>(q_ - 1))
            throw ConfigError("a " + std::to_string(q_) + "-class scheme needs " + std::to_string(q_ - 1) + " thresholds");
        if (!std::is_sorted(thresholds_.begin(), thresholds_.end()))
            throw ConfigError("quantile thresholds must be non-decreasing");
    }

    int q() const noexcept { return q_; }
    const std::vector<double>& thresholds() const noexcept { return thresholds_; }
    const std::optional<DateRange>& fitted_on() const noexcept { return fitted_on_; }
    std::size_t n_train() const noexcept { return n_train_; }
    // Fraction of training targets per class; empty for hand-built schemes.
    const std::vector<double>& class_share() const noexcept { return class_share_; }

    bool has_sparse_class() const noexcept {
        return std::any_of(class_share_.begin(), class_share_.end(), [](double s) { return s < kSparseClassShare; });
    }

    // Smallest k with value <= f_{k+1}, else q-1. Out-of-range values land in
    // the extreme classes.
    int assign_label(double value) const noexcept {
        return static_cast<int>(std::lower_bound(thresholds_.begin(), thresholds_.end(), value) - thresholds_.begin());
    }

    QuantileScheme with_fitted_on(DateRange r) const {
        QuantileScheme s = *this;
        s.fitted_on_ = r;
        return s;
    }

private:
    int q_;
    std::vector<double> thresholds_;
    std::optional<DateRange> fitted_on_;
    std::size_t n_train_;
    std::vector<double> class_share_;
};

inline int assign_label(const QuantileScheme& scheme, double value) { return scheme.assign_label(value); }

// f_k interpolates linearly between order statistics at 0-indexed position k(n-1)/q.
inline QuantileScheme fit_quantiles(std::span<const double> training_targets, int q) {
    if (training_targets.empty()) throw InsufficientData("fit_quantiles: no training targets");
    if (q < 2) throw ConfigError("quantile count must be at least 2");
    std::vector<double> sorted(training_targets.begin(), training_targets.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(q - 1));
    for (int k = 1; k < q; ++k) {
        const double pos = static_cast<double>(k) * static_cast<double>(n - 1) / static_cast<double>(q);
        const double lo = std::floor(pos);
        const double frac = pos - lo;
        const auto i = static_cast<std::size_t>(lo);
        const double below = sorted[i];
        const double above = sorted[std::min(i + 1, n - 1)];
        f.push_back(below + frac * (above - below));
    }

    std::vector<double> share(static_cast<std::size_t>(q), 0.0);
    for (double v : sorted)
        share[static_cast<std::size_t>(std::lower_bound(f.begin(), f.end(), v) - f.begin())] += 1.0;
    for (double& s : share) s /= static_cast<double>(n);
    return QuantileScheme(q, std::move(f), std::nullopt, n, std::move(share));
}

inline QuantileScheme fit_quantiles(const std::vector<double>& training_targets, int q) {
    return fit_quantiles(std::span<const double>(training_targets), q);
}

struct LabeledExample {
    Date t_p;
    features::FeatureVector features;
    double target_value;
    int label;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    QuantileScheme scheme;
    DateRange range;
};

// Prediction days in `range` that have the full feature lookback inside the
// panel and whose target window ends inside `range`.
inline std::vector<Date> eligible_days(const VendorPanel& panel, const PredictionTask& task, const DateRange& range) {
    if (!panel.range().contains(range)) {
        throw RangeError("dataset range " + format_date(range.start) + ".." + format_date(range.end) +
                         " is outside the panel");
    }
    std::vector<Date> out;
    const Date first = std::max(range.start, features::earliest_feature_day(panel));
    const Date last = add_days(range.end, -task.horizon_days);
    for (Date d = first; d <= last; d = add_days(d, 1)) out.push_back(d);
    return out;
}

// Builds the labeled examples for `range`. With no scheme supplied the
// thresholds are fitted on this range's targets (training use); otherwise the
// given scheme labels the examples unchanged (test use).
inline Dataset build_dataset(const VendorPanel& panel, const PredictionTask& task, const DateRange& range,
                             const std::optional<QuantileScheme>& scheme = std::nullopt) {
    validate(task);
    const auto days = eligible_days(panel, task, range);
    if (days.empty()) {
        throw EmptyDataset("no eligible prediction days for " + describe(task) + " in " + format_date(range.start) +
                           ".." + format_date(range.end));
    }
    const auto& target_stream = panel.stream(task.epa_type);
    std::vector<double> targets;
    targets.reserve(days.size());
    for (Date d : days) targets.push_back(cumulative_target(target_stream, d, task.horizon_days));

    QuantileScheme s = scheme ? *scheme : fit_quantiles(targets, task.q).with_fitted_on(range);
    if (s.q() != task.q) throw ConfigError("scheme has " + std::to_string(s.q()) + " classes, task wants " +
                                           std::to_string(task.q));

    std::vector<LabeledExample> examples;
    examples.reserve(days.size());
    for (std::size_t i = 0; i < days.size(); ++i)
        examples.push_back({days[i], features::build_features(panel, days[i]), targets[i], s.assign_label(targets[i])});
    return {std::move(examples), std::move(s), range};
}

inline nlohmann::ordered_json to_json(const QuantileScheme& s) {
    nlohmann::ordered_json j;
    j["q"] = s.q();
    j["thresholds"] = s.thresholds();
    if (s.fitted_on()) {
        j["fitted_on"] = {{"start", format_date(s.fitted_on()->start)}, {"end", format_date(s.fitted_on()->end)}};
    } else {
        j["fitted_on"] = nullptr;
    }
    j["n_train"] = s.n_train();
    j["sparse_class"] = s.has_sparse_class();
    return j;
}

inline void write_dataset_header(std::ostream& out) {
    features::write_feature_header(out);
    out << ",target_value,label\n";
}

inline void write_dataset_rows(std::ostream& out, const std::string& vendor, const Dataset& d) {
    for (const auto& ex : d.examples) {
        features::write_feature_row(out, vendor, ex.features);
        out << ',' << format_real(ex.target_value) << ',' << ex.label << '\n';
    }
}

inline void write_dataset_csv(std::ostream& out, const std::string& vendor, const Dataset& d) {
    write_dataset_header(out);
    write_dataset_rows(out, vendor, d);
}

} // namespace smaepa::labeling
