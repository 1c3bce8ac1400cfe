#pragma once

// The 66-entry social-media feature vector at a prediction day t_p.
//
// Per SMA type (Post, Repost, Comment), in this order:
//   prev                         volume on day t_p - kPrevOffsetDays
//   for K in 3, 5, 7 over the closed window [t_p-K+1, t_p]:
//     sum mean max min var stdev theil
// giving 1 + 3*7 = 22 entries per type. Variance is the population variance.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "smaepa/core.hpp"
#include "smaepa/format.hpp"

namespace smaepa::features {

inline constexpr std::array<std::size_t, 3> kWindows{3, 5, 7};
inline constexpr std::size_t kStatsPerWindow = 7;
inline constexpr std::size_t kPerType = 1 + kWindows.size() * kStatsPerWindow;
inline constexpr std::size_t kFeatureCount = kSmaTypes.size() * kPerType;
inline constexpr std::size_t kMaxLookback = 7;
// Which day "prev" reads, counted back from t_p.
inline constexpr std::int64_t kPrevOffsetDays = 0;

static_assert(kFeatureCount == 66);

inline constexpr std::array<const char*, kStatsPerWindow> kStatNames{"sum", "mean", "max", "min",
                                                                     "var", "stdev", "theil"};

inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const auto names = [] {
        std::array<std::string, kFeatureCount> out;
        std::size_t i = 0;
        for (auto t : kSmaTypes) {
            const std::string type(to_string(t));
            out[i++] = type + "_prev";
            for (auto k : kWindows)
                for (auto stat : kStatNames) out[i++] = type + "_" + std::to_string(k) + "D_" + stat;
        }
        return out;
    }();
    return names;
}

// Position of `stat` for window K of SMA type `type`, or of prev when stat is empty.
inline std::size_t feature_index(ActivityType type, std::size_t k = 0, std::string_view stat = {}) {
    const auto t = static_cast<std::size_t>(std::find(kSmaTypes.begin(), kSmaTypes.end(), type) - kSmaTypes.begin());
    if (t >= kSmaTypes.size()) throw DimensionError("feature_index: not a social-media type");
    if (stat.empty()) return t * kPerType;
    const auto w = static_cast<std::size_t>(std::find(kWindows.begin(), kWindows.end(), k) - kWindows.begin());
    const auto s = static_cast<std::size_t>(
        std::find_if(kStatNames.begin(), kStatNames.end(), [&](const char* n) { return stat == n; }) -
        kStatNames.begin());
    if (w >= kWindows.size() || s >= kStatNames.size()) throw DimensionError("feature_index: unknown feature");
    return t * kPerType + 1 + w * kStatsPerWindow + s;
}

inline double theil_sen(std::span<const double> v) {
    if (v.size() < 2) throw InsufficientData("theil_sen: need at least 2 values");
    std::vector<double> slopes;
    slopes.reserve(v.size() * (v.size() - 1) / 2);
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) slopes.push_back((v[j] - v[i]) / static_cast<double>(j - i));
    const auto mid = slopes.begin() + static_cast<std::ptrdiff_t>(slopes.size() / 2);
    std::nth_element(slopes.begin(), mid, slopes.end());
    if (slopes.size() % 2 == 1) return *mid;
    const double below = *std::max_element(slopes.begin(), mid);
    return (below + *mid) / 2.0;
}

struct WindowStats {
    double sum = 0, mean = 0, max = 0, min = 0, var = 0, stdev = 0, theil = 0;

    std::array<double, kStatsPerWindow> as_array() const { return {sum, mean, max, min, var, stdev, theil}; }
};

inline WindowStats window_stats(std::span<const Count> window) {
    if (window.size() < 2) throw InsufficientData("window_stats: window must hold at least 2 days");
    const std::vector<double> v(window.begin(), window.end());
    WindowStats s;
    s.max = v[0];
    s.min = v[0];
    for (double x : v) {
        s.sum += x;
        s.max = std::max(s.max, x);
        s.min = std::min(s.min, x);
    }
    const auto k = static_cast<double>(v.size());
    s.mean = s.sum / k;
    for (double x : v) s.var += (x - s.mean) * (x - s.mean);
    s.var /= k;
    s.stdev = std::sqrt(s.var);
    s.theil = theil_sen(v);
    return s;
}

// Statistics over [t_p-K+1, t_p].
inline WindowStats window_stats(const DailySeries& series, Date t_p, std::size_t k) {
    const Date first = add_days(t_p, -static_cast<std::int64_t>(k) + 1);
    if (k < 2 || !series.covers(first) || !series.covers(t_p)) {
        throw RangeError("window of " + std::to_string(k) + " days ending " + format_date(t_p) +
                         " is outside the series " + format_date(series.start()) + ".." + format_date(series.end()));
    }
    return window_stats(series.values().subspan(series.index_of(first), k));
}

class FeatureVector {
public:
    FeatureVector(Date t_p, std::array<double, kFeatureCount> values) : t_p_(t_p), values_(values) {}

    Date t_p() const noexcept { return t_p_; }
    std::span<const double, kFeatureCount> values() const noexcept { return values_; }
    static const std::array<std::string, kFeatureCount>& names() { return feature_names(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double at(std::string_view name) const {
        const auto& n = names();
        auto it = std::find(n.begin(), n.end(), name);
        if (it == n.end()) throw DimensionError("unknown feature '" + std::string(name) + "'");
        return values_[static_cast<std::size_t>(it - n.begin())];
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    Date t_p_;
    std::array<double, kFeatureCount> values_;
};

inline Date earliest_feature_day(const VendorPanel& panel) {
    return add_days(panel.start(), static_cast<std::int64_t>(kMaxLookback) - 1);
}

inline FeatureVector build_features(const VendorPanel& panel, Date t_p) {
    const Date earliest = earliest_feature_day(panel);
    if (t_p < earliest || t_p > panel.end()) {
        throw RangeError("cannot build features at " + format_date(t_p) + ": valid prediction days are " +
                         format_date(earliest) + ".." + format_date(panel.end()));
    }
    std::array<double, kFeatureCount> out{};
    std::size_t i = 0;
    for (auto t : kSmaTypes) {
        const auto& s = panel.stream(t);
        out[i++] = static_cast<double>(s.at(add_days(t_p, -kPrevOffsetDays)));
        for (auto k : kWindows)
            for (double stat : window_stats(s, t_p, k).as_array()) out[i++] = stat;
    }
    return FeatureVector(t_p, out);
}

// One row per prediction day from the earliest valid day to the panel end.
inline std::vector<FeatureVector> build_feature_matrix(const VendorPanel& panel) {
    std::vector<FeatureVector> rows;
    for (Date d = earliest_feature_day(panel); d <= panel.end(); d = add_days(d, 1)) rows.push_back(build_features(panel, d));
    return rows;
}

inline void write_feature_header(std::ostream& out) {
    out << "vendor_id,t_p";
    for (const auto& n : feature_names()) out << ',' << n;
}

inline void write_feature_row(std::ostream& out, const std::string& vendor, const FeatureVector& f) {
    out << vendor << ',' << format_date(f.t_p());
    for (double v : f.values()) out << ',' << format_real(v);
}

} // namespace smaepa::features
