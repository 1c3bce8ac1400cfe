#include <gtest/gtest.h>

#include <cmath>

#include "smaepa/labeling.hpp"
#include "smaepa/oracle.hpp"
#include "support.hpp"

using namespace smaepa;
using namespace smaepa::labeling;
using smaepa::testkit::Gen;

namespace {

const Date kStart = make_date(2016, 1, 1);

std::vector<double> distinct_targets(Gen& g, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i) * 1.5 + 0.25;
    std::ranges::shuffle(v, g.rng);
    return v;
}

} // namespace

TEST(Task, GridAndValidation) {
    auto grid = full_task_grid();
    EXPECT_EQ(grid.size(), 27u);
    EXPECT_THROW(validate(PredictionTask{ActivityType::Post, 1, 2}), ConfigError);
    EXPECT_THROW(validate(PredictionTask{ActivityType::Order, 2, 2}), ConfigError);
    EXPECT_THROW(validate(PredictionTask{ActivityType::Order, 1, 4}), ConfigError);
}

TEST(CumulativeTarget, Examples) {
    DailySeries s(kStart, {9, 9, 9, 9, 5, 7, 1, 9});
    EXPECT_EQ(cumulative_target(s, add_days(kStart, 3), 3), 13.0);
    EXPECT_EQ(cumulative_target(s, add_days(kStart, 3), 1), 5.0);
    DailySeries zero(kStart, std::vector<Count>(20, 0));
    for (int h : kHorizons) EXPECT_EQ(cumulative_target(zero, add_days(kStart, 4), h), 0.0);
    EXPECT_THROW(cumulative_target(s, add_days(kStart, 5), 3), RangeError);
}

TEST(FitQuantiles, Examples) {
    EXPECT_EQ(fit_quantiles(std::vector<double>{1, 2, 3, 4}, 2).thresholds(), std::vector<double>{2.5});
    auto s = fit_quantiles(std::vector<double>{10, 20, 30, 40, 50, 60, 70, 80, 90}, 3);
    EXPECT_NEAR(s.thresholds()[0], 36.67, 0.01);
    EXPECT_NEAR(s.thresholds()[1], 63.33, 0.01);
    for (int q : kQuantileCounts) {
        const auto flat = fit_quantiles(std::vector<double>(17, 4.5), q);
        for (double t : flat.thresholds()) EXPECT_EQ(t, 4.5);
    }
    EXPECT_THROW(fit_quantiles(std::vector<double>{}, 2), InsufficientData);
}

TEST(AssignLabel, Examples) {
    QuantileScheme s(2, {2.5});
    EXPECT_EQ(s.assign_label(2), 0);
    EXPECT_EQ(s.assign_label(3), 1);
    EXPECT_EQ(s.assign_label(2.5), 0);
    auto five = fit_quantiles(std::vector<double>{1, 2, 3, 4, 5, 6}, 5);
    EXPECT_EQ(five.assign_label(1e9), 4);
    EXPECT_EQ(five.assign_label(-1e9), 0);
    EXPECT_THROW(QuantileScheme(3, {2, 1}), ConfigError);
}

TEST(LabelProperty, MatchesOracle) {
    Gen g(71);
    for (int trial = 0; trial < 500; ++trial) {
        const int q = kQuantileCounts[g.rng.below(3)];
        std::vector<double> train(g.size(1, 60));
        for (auto& v : train) v = static_cast<double>(g.count(20)); // many ties
        auto s = fit_quantiles(train, q);
        ASSERT_EQ(s.thresholds(), oracle::oracle_quantile_thresholds(train, q));
        for (int k = 0; k < 20; ++k) {
            const double v = g.rng.below(2) ? static_cast<double>(g.count(22)) : g.real(-2, 22);
            ASSERT_EQ(s.assign_label(v), oracle::oracle_quantile_label(train, q, v));
        }
        for (double t : s.thresholds()) ASSERT_EQ(s.assign_label(t), oracle::oracle_quantile_label(train, q, t));
    }
}

TEST(LabelProperty, Monotone) {
    Gen g(72);
    for (int trial = 0; trial < 300; ++trial) {
        const int q = kQuantileCounts[g.rng.below(3)];
        auto s = fit_quantiles(g.reals(g.size(1, 50), 0, 100), q);
        const double a = g.real(-10, 110), b = g.real(-10, 110);
        ASSERT_LE(s.assign_label(std::min(a, b)), s.assign_label(std::max(a, b)));
    }
}

TEST(LabelProperty, InvariantUnderIncreasingTransform) {
    Gen g(73);
    auto f = [](double x) { return std::exp(x / 10.0) + 3.0 * x; };
    for (int trial = 0; trial < 300; ++trial) {
        const int q = kQuantileCounts[g.rng.below(3)];
        auto train = distinct_targets(g, g.size(q, 60));
        std::vector<double> mapped(train.size());
        std::ranges::transform(train, mapped.begin(), f);
        auto s = fit_quantiles(train, q), t = fit_quantiles(mapped, q);
        // Rank-based: every training value keeps its class.
        for (double v : train) ASSERT_EQ(s.assign_label(v), t.assign_label(f(v)));
    }
}

TEST(LabelProperty, SelfLabelingIsBalanced) {
    Gen g(74);
    for (int trial = 0; trial < 300; ++trial) {
        const int q = kQuantileCounts[g.rng.below(3)];
        const auto n = g.size(static_cast<std::size_t>(q), 400);
        auto train = distinct_targets(g, n);
        auto s = fit_quantiles(train, q);
        std::vector<int> count(static_cast<std::size_t>(q), 0);
        for (double v : train) ++count[static_cast<std::size_t>(s.assign_label(v))];
        for (int c : count) ASSERT_LE(std::abs(static_cast<double>(c) - static_cast<double>(n) / q), 2.0) << n;
    }
}

TEST(SparseClass, FlagsClassesBelowFivePercent) {
    std::vector<double> t(100, 0.0);
    t[99] = 5;
    EXPECT_TRUE(fit_quantiles(t, 3).has_sparse_class());
    std::vector<double> u(100);
    for (int i = 0; i < 100; ++i) u[static_cast<std::size_t>(i)] = i;
    EXPECT_FALSE(fit_quantiles(u, 5).has_sparse_class());
}

TEST(BuildDataset, EligibleDayCount) {
    Gen g(75);
    auto p = g.panel(730);
    const DateRange year(kStart, add_days(kStart, 364));
    auto d = build_dataset(p, {ActivityType::Order, 7, 3}, year);
    // Last 7 days lack targets; the first 6 lack the 7-day lookback.
    EXPECT_EQ(d.examples.size(), 365u - 7u - 6u);
    EXPECT_EQ(d.examples.front().t_p, add_days(kStart, 6));
    EXPECT_EQ(d.examples.back().t_p, add_days(kStart, 357));
    ASSERT_TRUE(d.scheme.fitted_on());
    EXPECT_EQ(*d.scheme.fitted_on(), year);
    EXPECT_EQ(d.scheme.n_train(), d.examples.size());

    const DateRange later(add_days(kStart, 365), add_days(kStart, 729));
    EXPECT_EQ(build_dataset(p, {ActivityType::Order, 1, 2}, later).examples.size(), 364u);
}

TEST(BuildDataset, SuppliedSchemeClampsToTopClass) {
    Gen g(76);
    std::map<ActivityType, std::vector<Count>> m;
    for (auto t : kAllActivities) m[t] = g.counts(100, 5);
    m[ActivityType::Search] = std::vector<Count>(100, 50);
    auto p = testkit::panel_from(m, kStart);
    QuantileScheme low(5, {1, 2, 3, 4});
    auto d = build_dataset(p, {ActivityType::Search, 3, 5}, DateRange(add_days(kStart, 40), add_days(kStart, 70)), low);
    for (const auto& ex : d.examples) EXPECT_EQ(ex.label, 4);
    EXPECT_EQ(d.scheme.thresholds(), low.thresholds());
}

TEST(BuildDataset, EmptyRange) {
    Gen g(77);
    auto p = g.panel(30);
    EXPECT_THROW(build_dataset(p, {ActivityType::Order, 7, 2}, DateRange(kStart, add_days(kStart, 9))), EmptyDataset);
    EXPECT_THROW(build_dataset(p, {ActivityType::Order, 1, 2}, DateRange(kStart, add_days(kStart, 40))), RangeError);
}

TEST(BuildDataset, SelfLabelsUseOwnThresholds) {
    Gen g(78);
    auto p = g.panel(200, kStart, "V", 500);
    auto d = build_dataset(p, {ActivityType::Clickthrough, 3, 3}, p.range());
    for (const auto& ex : d.examples) {
        ASSERT_EQ(ex.label, d.scheme.assign_label(ex.target_value));
        ASSERT_EQ(ex.target_value, cumulative_target(p.stream(ActivityType::Clickthrough), ex.t_p, 3));
    }
}

// Targets ignore commerce days outside (t_p, t_p+h]; features ignore commerce entirely.
TEST(LeakageProperty, MutationsOutsideTargetWindowChangeNothing) {
    Gen g(79);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = g.size(30, 80);
        auto p = g.panel(n);
        const PredictionTask task{kEpaTypes[g.rng.below(3)], kHorizons[g.rng.below(3)], kQuantileCounts[g.rng.below(3)]};
        const auto d = build_dataset(p, task, p.range());
        const auto i = g.rng.below(d.examples.size());
        const auto tp = static_cast<std::size_t>(days_between(p.start(), d.examples[i].t_p));

        auto streams = p.streams();
        std::vector<Count> v(p.stream(task.epa_type).values().begin(), p.stream(task.epa_type).values().end());
        for (std::size_t k = 0; k < n; ++k)
            if (k <= tp || k > tp + static_cast<std::size_t>(task.horizon_days)) v[k] = g.count(10000);
        streams[index_of(task.epa_type)] = DailySeries(p.start(), v);
        for (auto e : kEpaTypes)
            if (e != task.epa_type) streams[index_of(e)] = DailySeries(p.start(), g.counts(n, 10000));
        VendorPanel q(p.vendor_id(), p.category(), streams);

        const auto ex = build_dataset(q, task, p.range(), d.scheme).examples[i];
        ASSERT_EQ(ex.t_p, d.examples[i].t_p);
        ASSERT_EQ(ex.features, d.examples[i].features);
        ASSERT_EQ(ex.target_value, d.examples[i].target_value);
        ASSERT_EQ(ex.label, d.examples[i].label);
    }
}

TEST(SchemeJson, Fields) {
    auto s = fit_quantiles(std::vector<double>{1, 2, 3, 4}, 2).with_fitted_on(DateRange(kStart, add_days(kStart, 3)));
    auto j = to_json(s);
    EXPECT_EQ(j["q"], 2);
    EXPECT_EQ(j["thresholds"][0], 2.5);
    EXPECT_EQ(j["fitted_on"]["start"], "2016-01-01");
    EXPECT_EQ(j["n_train"], 4);
}
