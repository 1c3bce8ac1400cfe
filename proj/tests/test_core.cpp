#include <gtest/gtest.h>

#include "smaepa/core.hpp"
#include "support.hpp"

using namespace smaepa;
using smaepa::testkit::Gen;

namespace {

std::map<ActivityType, DailySeries> six(Date start, const std::vector<Count>& v) {
    std::map<ActivityType, DailySeries> m;
    for (auto t : kAllActivities) m.emplace(t, DailySeries(start, v));
    return m;
}

} // namespace

TEST(Dates, ParseAndFormatRoundTrip) {
    auto d = parse_date("2016-02-29");
    ASSERT_TRUE(d);
    EXPECT_EQ(format_date(*d), "2016-02-29");
    EXPECT_FALSE(parse_date("2017-02-29"));
    EXPECT_FALSE(parse_date("2016-13-01"));
    EXPECT_FALSE(parse_date("2016/01/01"));
    EXPECT_FALSE(parse_date(""));
    EXPECT_EQ(days_between(make_date(2016, 1, 1), make_date(2017, 1, 1)), 366);
}

TEST(Activity, ParseIsCaseInsensitive) {
    EXPECT_EQ(parse_activity("clickthrough"), ActivityType::Clickthrough);
    EXPECT_EQ(parse_activity("ORDER"), ActivityType::Order);
    EXPECT_FALSE(parse_activity("Like"));
    for (auto t : kAllActivities) EXPECT_EQ(parse_activity(to_string(t)), t);
    EXPECT_TRUE(is_sma(ActivityType::Comment));
    EXPECT_TRUE(is_epa(ActivityType::Search));
}

TEST(DateRange, RejectsEndBeforeStart) {
    EXPECT_THROW(DateRange(make_date(2016, 1, 2), make_date(2016, 1, 1)), RangeError);
    EXPECT_EQ(DateRange(make_date(2016, 1, 1), make_date(2016, 1, 1)).days(), 1u);
}

TEST(DailySeries, RejectsEmpty) { EXPECT_THROW(DailySeries(make_date(2016, 1, 1), {}), InsufficientData); }

TEST(Align, IdenticalRangesAreUnchanged) {
    const auto start = make_date(2016, 1, 1);
    const std::vector<Count> v{1, 2, 3, 4, 5};
    auto p = align(six(start, v), FillPolicy::Strict, "V");
    EXPECT_EQ(p.start(), start);
    EXPECT_EQ(p.days(), 5u);
    for (auto t : kAllActivities) EXPECT_TRUE(std::ranges::equal(p.stream(t).values(), v));
}

TEST(Align, ZeroFillPadsShortSeries) {
    const auto start = make_date(2016, 1, 1);
    auto m = six(start, std::vector<Count>(12, 7));
    m.erase(ActivityType::Post);
    m.emplace(ActivityType::Post, DailySeries(start, std::vector<Count>(10, 3)));
    auto p = align(m, FillPolicy::ZeroFill);
    ASSERT_EQ(p.days(), 12u);
    const auto& post = p.stream(ActivityType::Post);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(post[i], 3u);
    EXPECT_EQ(post[10], 0u);
    EXPECT_EQ(post[11], 0u);
}

TEST(Align, StrictNamesOffendingTypes) {
    const auto start = make_date(2016, 1, 1);
    auto m = six(start, std::vector<Count>(12, 7));
    m.erase(ActivityType::Post);
    m.emplace(ActivityType::Post, DailySeries(start, std::vector<Count>(10, 3)));
    try {
        align(m, FillPolicy::Strict);
        FAIL() << "expected AlignmentError";
    } catch (const AlignmentError& e) {
        EXPECT_EQ(e.offending(), std::vector<ActivityType>{ActivityType::Post});
    }
}

TEST(Align, MissingTypes) {
    EXPECT_THROW(align({}, FillPolicy::ZeroFill), MissingActivityType);
    auto m = six(make_date(2016, 1, 1), {1, 2});
    m.erase(ActivityType::Order);
    EXPECT_THROW(align(m, FillPolicy::ZeroFill), MissingActivityType);
}

TEST(Slice, FullRangeIsIdentity) {
    Gen g(1);
    auto p = g.panel(40);
    EXPECT_EQ(slice(p, p.range()), p);
}

TEST(Slice, FirstYearOfTwo) {
    Gen g(2);
    auto p = g.panel(730);
    auto s = slice(p, DateRange(p.start(), add_days(p.start(), 364)));
    EXPECT_EQ(s.days(), 365u);
}

TEST(Slice, BeyondEndThrows) {
    Gen g(3);
    auto p = g.panel(30);
    EXPECT_THROW(slice(p, DateRange(p.start(), add_days(p.end(), 1))), RangeError);
    EXPECT_THROW(slice(p, DateRange(add_days(p.start(), -1), p.end())), RangeError);
}

TEST(SliceProperty, MatchesShiftedWindow) {
    Gen g(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = g.size(1, 60);
        auto p = g.panel(n, add_days(make_date(2016, 1, 1), static_cast<std::int64_t>(g.size(0, 900))));
        const auto a = g.size(0, n - 1);
        const auto b = g.size(a, n - 1);
        auto s = slice(p, DateRange(add_days(p.start(), static_cast<std::int64_t>(a)),
                                    add_days(p.start(), static_cast<std::int64_t>(b))));
        ASSERT_EQ(s.days(), b - a + 1);
        for (auto t : kAllActivities)
            for (std::size_t i = 0; i <= b - a; ++i) ASSERT_EQ(s.stream(t)[i], p.stream(t)[a + i]);
    }
}

TEST(AlignProperty, SliceToIntersectionRecoversOriginals) {
    Gen g(12);
    const auto base = make_date(2016, 3, 1);
    for (int trial = 0; trial < 200; ++trial) {
        // Every series covers [base+10, base+19] so the intersection is non-empty.
        std::map<ActivityType, DailySeries> m;
        for (auto t : kAllActivities) {
            const auto lead = static_cast<std::int64_t>(g.size(0, 10));
            const auto tail = g.size(0, 10);
            m.emplace(t, DailySeries(add_days(base, 10 - lead), g.counts(static_cast<std::size_t>(lead) + 10 + tail)));
        }
        Date lo = base, hi = add_days(base, 1000);
        for (const auto& [t, s] : m) {
            lo = std::max(lo, s.start());
            hi = std::min(hi, s.end());
        }
        auto p = slice(align(m, FillPolicy::ZeroFill), DateRange(lo, hi));
        for (const auto& [t, s] : m)
            for (Date d = lo; d <= hi; d = add_days(d, 1)) ASSERT_EQ(p.stream(t).at(d), s.at(d));
    }
}
