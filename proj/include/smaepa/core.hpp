#pragma once

// Domain types shared by every stage of the pipeline: activity kinds,
// calendar dates, contiguous daily count series and six-stream vendor panels.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smaepa/error.hpp"

namespace smaepa {

using Date = std::chrono::sys_days;
using Count = std::uint64_t;

inline Date make_date(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline Date add_days(Date d, std::int64_t n) { return d + std::chrono::days{n}; }

inline std::int64_t days_between(Date from, Date to) { return (to - from).count(); }

// Strict YYYY-MM-DD; returns nullopt for anything else, including invalid calendar days.
inline std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        }
        std::from_chars(s.data() + pos, s.data() + pos + len, v);
        return v;
    };
    auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

inline std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

enum class ActivityType : std::uint8_t { Post, Repost, Comment, Search, Clickthrough, Order };

inline constexpr std::size_t kActivityCount = 6;

inline constexpr std::array<ActivityType, kActivityCount> kAllActivities{
    ActivityType::Post,   ActivityType::Repost,       ActivityType::Comment,
    ActivityType::Search, ActivityType::Clickthrough, ActivityType::Order};

inline constexpr std::array<ActivityType, 3> kSmaTypes{ActivityType::Post, ActivityType::Repost,
                                                      ActivityType::Comment};

inline constexpr std::array<ActivityType, 3> kEpaTypes{ActivityType::Search, ActivityType::Clickthrough,
                                                      ActivityType::Order};

constexpr bool is_sma(ActivityType t) noexcept {
    return t == ActivityType::Post || t == ActivityType::Repost || t == ActivityType::Comment;
}

constexpr bool is_epa(ActivityType t) noexcept { return !is_sma(t); }

constexpr std::size_t index_of(ActivityType t) noexcept { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(ActivityType t) noexcept {
    switch (t) {
        case ActivityType::Post: return "Post";
        case ActivityType::Repost: return "Repost";
        case ActivityType::Comment: return "Comment";
        case ActivityType::Search: return "Search";
        case ActivityType::Clickthrough: return "Clickthrough";
        case ActivityType::Order: return "Order";
    }
    return "?";
}

// Case-insensitive.
inline std::optional<ActivityType> parse_activity(std::string_view s) {
    for (auto t : kAllActivities) {
        auto name = to_string(t);
        if (name.size() == s.size() &&
            std::equal(name.begin(), name.end(), s.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            return t;
        }
    }
    return std::nullopt;
}

class AlignmentError : public Error {
public:
    explicit AlignmentError(std::vector<ActivityType> offending)
        : Error(describe(offending)), offending_(std::move(offending)) {}

    const std::vector<ActivityType>& offending() const noexcept { return offending_; }

private:
    static std::string describe(const std::vector<ActivityType>& types) {
        std::string msg = "date ranges differ for:";
        for (auto t : types) {
            msg += ' ';
            msg += to_string(t);
        }
        return msg;
    }

    std::vector<ActivityType> offending_;
};

// Inclusive calendar range.
struct DateRange {
    Date start;
    Date end;

    DateRange(Date s, Date e) : start(s), end(e) {
        if (e < s) throw RangeError("date range end " + format_date(e) + " precedes start " + format_date(s));
    }

    std::size_t days() const noexcept { return static_cast<std::size_t>(days_between(start, end)) + 1; }
    bool contains(Date d) const noexcept { return start <= d && d <= end; }
    bool contains(const DateRange& r) const noexcept { return start <= r.start && r.end <= end; }

    friend bool operator==(const DateRange&, const DateRange&) = default;
};

class DailySeries {
public:
    DailySeries(Date start, std::vector<Count> values) : start_(start), values_(std::move(values)) {
        if (values_.empty()) throw InsufficientData("daily series must contain at least one day");
    }

    Date start() const noexcept { return start_; }
    Date end() const noexcept { return add_days(start_, static_cast<std::int64_t>(values_.size()) - 1); }
    DateRange range() const { return {start(), end()}; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const Count> values() const noexcept { return values_; }

    bool covers(Date d) const noexcept { return start_ <= d && d <= end(); }

    std::size_t index_of(Date d) const {
        if (!covers(d)) throw RangeError("date " + format_date(d) + " outside series " + format_date(start_) +
                                         ".." + format_date(end()));
        return static_cast<std::size_t>(days_between(start_, d));
    }

    Count at(Date d) const { return values_[index_of(d)]; }
    Count operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const DailySeries&, const DailySeries&) = default;

private:
    Date start_;
    std::vector<Count> values_;
};

enum class FillPolicy { ZeroFill, Strict };

// Six aligned activity streams for one vendor. Immutable once built.
class VendorPanel {
public:
    using Streams = std::array<DailySeries, kActivityCount>;

    VendorPanel(std::string vendor_id, std::string category, Streams streams)
        : vendor_id_(std::move(vendor_id)), category_(std::move(category)), streams_(std::move(streams)) {
        std::vector<ActivityType> bad;
        for (auto t : kAllActivities) {
            const auto& s = streams_[index_of(t)];
            if (s.start() != streams_[0].start() || s.size() != streams_[0].size()) bad.push_back(t);
        }
        if (!bad.empty()) throw AlignmentError(std::move(bad));
    }

    const std::string& vendor_id() const noexcept { return vendor_id_; }
    const std::string& category() const noexcept { return category_; }
    const DailySeries& stream(ActivityType t) const noexcept { return streams_[index_of(t)]; }
    const Streams& streams() const noexcept { return streams_; }

    Date start() const noexcept { return streams_[0].start(); }
    Date end() const noexcept { return streams_[0].end(); }
    DateRange range() const { return streams_[0].range(); }
    std::size_t days() const noexcept { return streams_[0].size(); }

    VendorPanel with_category(std::string category) const {
        VendorPanel p = *this;
        p.category_ = std::move(category);
        return p;
    }

    friend bool operator==(const VendorPanel&, const VendorPanel&) = default;

private:
    std::string vendor_id_;
    std::string category_;
    Streams streams_;
};

// Aligns six series onto the union of their date ranges.
inline VendorPanel align(const std::map<ActivityType, DailySeries>& series_by_type, FillPolicy policy,
                         std::string vendor_id = {}, std::string category = {}) {
    if (series_by_type.empty()) throw MissingActivityType("no activity series supplied");
    std::string missing;
    for (auto t : kAllActivities) {
        if (!series_by_type.contains(t)) {
            if (!missing.empty()) missing += ", ";
            missing += to_string(t);
        }
    }
    if (!missing.empty()) throw MissingActivityType("missing activity series: " + missing);

    Date lo = series_by_type.begin()->second.start();
    Date hi = series_by_type.begin()->second.end();
    for (const auto& [t, s] : series_by_type) {
        lo = std::min(lo, s.start());
        hi = std::max(hi, s.end());
    }

    if (policy == FillPolicy::Strict) {
        std::vector<ActivityType> bad;
        for (const auto& [t, s] : series_by_type) {
            if (s.start() != lo || s.end() != hi) bad.push_back(t);
        }
        if (!bad.empty()) throw AlignmentError(std::move(bad));
    }

    const auto n = static_cast<std::size_t>(days_between(lo, hi)) + 1;
    auto fill = [&](const DailySeries& s) {
        std::vector<Count> out(n, 0);
        const auto offset = static_cast<std::size_t>(days_between(lo, s.start()));
        std::copy(s.values().begin(), s.values().end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
        return DailySeries(lo, std::move(out));
    };

    return VendorPanel(std::move(vendor_id), std::move(category),
                       {fill(series_by_type.at(ActivityType::Post)), fill(series_by_type.at(ActivityType::Repost)),
                        fill(series_by_type.at(ActivityType::Comment)), fill(series_by_type.at(ActivityType::Search)),
                        fill(series_by_type.at(ActivityType::Clickthrough)),
                        fill(series_by_type.at(ActivityType::Order))});
}

inline VendorPanel slice(const VendorPanel& panel, const DateRange& range) {
    if (!panel.range().contains(range)) {
        throw RangeError("slice " + format_date(range.start) + ".." + format_date(range.end) + " outside panel " +
                         format_date(panel.start()) + ".." + format_date(panel.end()));
    }
    const auto offset = static_cast<std::ptrdiff_t>(days_between(panel.start(), range.start));
    const auto len = static_cast<std::ptrdiff_t>(range.days());
    auto cut = [&](ActivityType t) {
        auto v = panel.stream(t).values();
        return DailySeries(range.start, std::vector<Count>(v.begin() + offset, v.begin() + offset + len));
    };
    return VendorPanel(panel.vendor_id(), panel.category(),
                       {cut(ActivityType::Post), cut(ActivityType::Repost), cut(ActivityType::Comment),
                        cut(ActivityType::Search), cut(ActivityType::Clickthrough), cut(ActivityType::Order)});
}

// Widens integer counts for numeric work.
inline std::vector<double> to_real(std::span<const Count> v) { return {v.begin(), v.end()}; }

} // namespace smaepa
