#include <gtest/gtest.h>

#include <cmath>

#include "smaepa/correlation.hpp"
#include "smaepa/oracle.hpp"
#include "smaepa/synth.hpp"
#include "support.hpp"

using namespace smaepa;
using namespace smaepa::correlation;
using smaepa::oracle::oracle_pearson;
using smaepa::testkit::Gen;

namespace {

const Date kStart = make_date(2016, 1, 1);

std::optional<double> oracle_or_undefined(const std::vector<double>& x, const std::vector<double>& y) {
    try {
        return oracle_pearson(x, y);
    } catch (const UndefinedCorrelation&) {
        return std::nullopt;
    }
}

} // namespace

TEST(Pearson, Examples) {
    Gen g(41);
    auto x = g.reals(730);
    EXPECT_NEAR(*pearson(x, x), 1.0, 1e-12);
    EXPECT_FALSE(pearson(std::vector<double>(5, 3.0), g.reals(5)));
    EXPECT_NEAR(*pearson({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
    EXPECT_THROW(pearson({1, 2}, {1, 2, 3}), DimensionError);
    EXPECT_THROW(pearson({1}, {1}), DimensionError);
}

TEST(PearsonProperty, SymmetricAffineBoundedAndMatchesOracle) {
    Gen g(42);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = g.size(2, 80);
        auto x = g.reals(n), y = g.reals(n);
        auto r = pearson(x, y);
        ASSERT_TRUE(r);
        ASSERT_LE(std::abs(*r), 1.0);
        ASSERT_NEAR(*r, oracle_pearson(x, y), 1e-10);
        ASSERT_NEAR(*r, *pearson(y, x), 1e-10);
        const double a = g.real(0.01, 50), b = g.real(-1000, 1000);
        std::vector<double> ax(n);
        for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + b;
        ASSERT_NEAR(*pearson(ax, y), *r, 1e-10);
    }
}

TEST(NextDayMatrix, ShiftedIdentity) {
    Gen g(43);
    auto post = g.counts(100);
    std::vector<Count> search(100, 0);
    for (std::size_t i = 0; i + 1 < 100; ++i) search[i + 1] = post[i];
    std::map<ActivityType, std::vector<Count>> m;
    for (auto t : kAllActivities) m[t] = g.counts(100);
    m[ActivityType::Post] = post;
    m[ActivityType::Search] = search;
    m[ActivityType::Repost] = std::vector<Count>(100, 0);
    auto mat = next_day_matrix(testkit::panel_from(m, kStart));
    EXPECT_NEAR(*mat.at(0, 0), 1.0, 1e-12);
    for (std::size_t e = 0; e < 3; ++e) EXPECT_FALSE(mat.at(1, e)) << "Repost row";
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t e = 0; e < 3; ++e)
            if (mat.at(s, e)) EXPECT_LE(std::abs(*mat.at(s, e)), 1.0);
}

TEST(NextDayMatrix, PlantedCouplingIsMaximal) {
    synth::SynthConfig c;
    c.seed = 44;
    c.days = 730;
    c.lag_days = 1;
    c.coupling = {{ActivityType::Post, ActivityType::Search, 2.0}};
    auto p = synth::generate(c);
    auto mat = next_day_matrix(p);
    // The oracle agrees cell by cell.
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t e = 0; e < 3; ++e) {
            auto x = to_real(p.stream(kSmaTypes[s]).values().first(729));
            auto y = to_real(p.stream(kEpaTypes[e]).values().subspan(1));
            ASSERT_NEAR(*mat.at(s, e), oracle_pearson(x, y), 1e-10);
            if (s || e) EXPECT_GT(*mat.at(0, 0), *mat.at(s, e));
        }
}

TEST(NextDayMatrix, TooShort) {
    Gen g(45);
    EXPECT_THROW(next_day_matrix(g.panel(2)), DimensionError);
}

TEST(Rolling, PointCount) {
    Gen g(46);
    auto x = DailySeries(kStart, g.counts(730)), y = DailySeries(kStart, g.counts(730));
    auto r = rolling(x, y, 30, 1);
    ASSERT_EQ(r.points.size(), 700u);
    EXPECT_EQ(r.points.front().end_date, add_days(kStart, 30));
    EXPECT_EQ(r.points.back().end_date, add_days(kStart, 729));
    for (std::size_t i = 1; i < r.points.size(); ++i)
        ASSERT_EQ(r.points[i].end_date, add_days(r.points[i - 1].end_date, 1));
}

TEST(Rolling, ShiftedIdentityIsOne) {
    Gen g(47);
    for (std::size_t lag : {1u, 4u, 9u}) {
        auto xv = g.lumpy_counts(200);
        std::vector<Count> yv(200, 0);
        for (std::size_t i = 0; i + lag < 200; ++i) yv[i + lag] = xv[i];
        auto r = rolling(DailySeries(kStart, xv), DailySeries(kStart, yv), 30, lag);
        for (const auto& p : r.points)
            if (p.r) ASSERT_NEAR(*p.r, 1.0, 1e-12);
    }
}

TEST(Rolling, ConstantStretchUndefinedOnlyThere) {
    Gen g(48);
    auto xv = g.counts(120, 1000);
    std::fill(xv.begin() + 50, xv.begin() + 90, 5); // days 50..89
    auto yv = g.counts(120, 1000);
    auto r = rolling(DailySeries(kStart, xv), DailySeries(kStart, yv), 10, 0);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const std::size_t end = 9 + i;
        const bool inside = end - 9 >= 50 && end <= 89;
        ASSERT_EQ(!r.points[i].r, inside) << end;
    }
}

TEST(Rolling, Errors) {
    Gen g(49);
    auto x = DailySeries(kStart, g.counts(40));
    EXPECT_THROW(rolling(x, DailySeries(kStart, g.counts(39)), 10, 1), DimensionError);
    EXPECT_THROW(rolling(x, x, 1, 1), DimensionError);
    EXPECT_THROW(rolling(x, x, 35, 6), DimensionError);
    EXPECT_NO_THROW(rolling(x, x, 35, 5));
}

TEST(RollingProperty, MatchesOracleOnEveryWindow) {
    Gen g(50);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = g.size(12, 120);
        const auto w = g.size(2, 10);
        const auto lag = g.size(0, n - w);
        auto xv = g.lumpy_counts(n, 20), yv = g.lumpy_counts(n, 20);
        DailySeries x(kStart, xv), y(kStart, yv);
        auto two = rolling(x, y, w, lag);
        auto inc = rolling(x, y, w, lag, RollingMode::Incremental);
        ASSERT_EQ(two.points.size(), n - w - lag + 1);
        ASSERT_EQ(inc.points.size(), two.points.size());
        for (std::size_t i = 0; i < two.points.size(); ++i) {
            const std::size_t end = w - 1 + lag + i;
            std::vector<double> xs(xv.begin() + (end + 1 - w - lag), xv.begin() + (end + 1 - lag));
            std::vector<double> ys(yv.begin() + (end + 1 - w), yv.begin() + (end + 1));
            auto o = oracle_or_undefined(xs, ys);
            ASSERT_EQ(o.has_value(), two.points[i].r.has_value());
            ASSERT_EQ(o.has_value(), inc.points[i].r.has_value());
            ASSERT_EQ(inc.points[i].end_date, two.points[i].end_date);
            if (o) {
                ASSERT_NEAR(*two.points[i].r, *o, 1e-10);
                ASSERT_NEAR(*inc.points[i].r, *two.points[i].r, 1e-8);
                ASSERT_LE(std::abs(*two.points[i].r), 1.0);
            }
        }
    }
}

TEST(RollingProperty, FullWindowLagZeroIsPearson) {
    Gen g(51);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = g.size(2, 200);
        auto xv = g.counts(n), yv = g.counts(n);
        auto r = rolling(DailySeries(kStart, xv), DailySeries(kStart, yv), n, 0);
        ASSERT_EQ(r.points.size(), 1u);
        auto p = pearson(std::span<const Count>(xv), std::span<const Count>(yv));
        ASSERT_EQ(r.points[0].r, p);
    }
}

TEST(RollingProperty, UnstableUnderNullCoupling) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        synth::SynthConfig c;
        c.seed = seed;
        c.days = 365;
        auto p = synth::generate(c);
        for (auto s : kSmaTypes)
            for (auto e : kEpaTypes) {
                auto r = rolling(p.stream(s), p.stream(e), 30, 1);
                std::vector<double> v;
                for (const auto& pt : r.points)
                    if (pt.r) v.push_back(*pt.r);
                if (v.size() < 2) continue;
                double m = 0, ss = 0;
                for (double x : v) m += x;
                m /= static_cast<double>(v.size());
                for (double x : v) ss += (x - m) * (x - m);
                EXPECT_GT(ss, 0.0);
            }
    }
}

TEST(LagScan, PlantedLag) {
    synth::SynthConfig c;
    c.seed = 52;
    c.days = 730;
    c.lag_days = 3;
    c.coupling = {{ActivityType::Post, ActivityType::Search, 2.0}};
    auto p = synth::generate(c);
    auto scan = lag_scan(p.stream(ActivityType::Post), p.stream(ActivityType::Search), 30, 15);
    ASSERT_EQ(scan.summaries.size(), 15u);
    EXPECT_EQ(scan.best_lag, 3u);
    for (const auto& s : scan.summaries) {
        EXPECT_LE(*s.min, *s.mean);
        EXPECT_LE(*s.mean, *s.max);
    }
}

TEST(LagScan, NullCouplingMeansNearZero) {
    synth::SynthConfig c;
    c.seed = 53;
    c.days = 730;
    auto p = synth::generate(c);
    for (auto s : kSmaTypes)
        for (auto e : kEpaTypes) {
            auto scan = lag_scan(p.stream(s), p.stream(e), 30, 15);
            for (const auto& sum : scan.summaries) EXPECT_LT(std::abs(*sum.mean), 0.15);
        }
}

TEST(LagScan, SingleLag) {
    Gen g(54);
    auto x = DailySeries(kStart, g.counts(60));
    auto scan = lag_scan(x, DailySeries(kStart, g.counts(60)), 30, 1);
    EXPECT_EQ(scan.summaries.size(), 1u);
    EXPECT_EQ(scan.series.size(), 1u);
    EXPECT_THROW(lag_scan(x, x, 30, 0), DimensionError);
}

TEST(LagScan, SummariesSkipUndefined) {
    std::vector<Count> flat(40, 2);
    Gen g(55);
    auto scan = lag_scan(DailySeries(kStart, flat), DailySeries(kStart, g.counts(40)), 10, 2);
    EXPECT_EQ(scan.summaries[0].defined, 0u);
    EXPECT_FALSE(scan.summaries[0].mean);
    EXPECT_FALSE(scan.best_lag);
}
