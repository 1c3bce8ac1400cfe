#pragma once

// Pearson correlation between social-media and commerce streams: over the
// full panel, in sliding windows, and across a range of SMA-leads-EPA lags.

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
#include "smaepa/format.hpp"

namespace smaepa::correlation {

// Two-pass Pearson coefficient. nullopt when either input has zero variance.
template <typename T, typename U>
std::optional<double> pearson(std::span<const T> x, std::span<const U> y) {
    if (x.size() != y.size()) {
        throw DimensionError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) throw DimensionError("pearson: need at least 2 observations");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (auto v : x) mx += static_cast<double>(v);
    for (auto v : y) my += static_cast<double>(v);
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = static_cast<double>(x[i]) - mx;
        const double dy = static_cast<double>(y[i]) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(std::span<const double>(x), std::span<const double>(y));
}

// Rows follow kSmaTypes, columns kEpaTypes.
struct CorrelationMatrix {
    std::array<std::array<std::optional<double>, 3>, 3> cells{};

    const std::optional<double>& at(std::size_t sma_row, std::size_t epa_col) const { return cells[sma_row][epa_col]; }
};

// SMA on day t against EPA on day t+1 over the whole panel.
inline CorrelationMatrix next_day_matrix(const VendorPanel& panel) {
    if (panel.days() < 3) throw DimensionError("next_day_matrix: panel needs at least 3 days");
    CorrelationMatrix m;
    const auto n = panel.days();
    for (std::size_t s = 0; s < 3; ++s) {
        auto x = panel.stream(kSmaTypes[s]).values().first(n - 1);
        for (std::size_t e = 0; e < 3; ++e) {
            auto y = panel.stream(kEpaTypes[e]).values().subspan(1);
            m.cells[s][e] = pearson(x, y);
        }
    }
    return m;
}

struct RollingPoint {
    Date end_date;
    std::optional<double> r;
};

struct RollingSeries {
    std::size_t window_days = 0;
    std::size_t lag_days = 0;
    std::vector<RollingPoint> points;
};

enum class RollingMode {
    TwoPass,     // every window recomputed from scratch; the reference
    Incremental, // running sums updated as the window slides
};

namespace detail {

inline void check_rolling(const DailySeries& x, const DailySeries& y, std::size_t window, std::size_t lag) {
    if (x.start() != y.start() || x.size() != y.size()) throw DimensionError("rolling: series are not aligned");
    if (window < 2) throw DimensionError("rolling: window must be at least 2 days");
    if (x.size() < window + lag) {
        throw DimensionError("rolling: series of " + std::to_string(x.size()) + " days shorter than window + lag (" +
                             std::to_string(window + lag) + ")");
    }
}

// Integer counts are shifted by an integer so running sums stay exact.
inline std::vector<std::optional<double>> incremental(std::span<const Count> x, std::span<const Count> y,
                                                      std::size_t window, std::size_t lag) {
    const std::size_t first_end = window - 1 + lag;
    const std::size_t points = y.size() - first_end;
    const double kx = static_cast<double>(x[0]);
    const double ky = static_cast<double>(y[lag]);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    auto add = [&](std::size_t xi, std::size_t yi, double sign) {
        const double a = static_cast<double>(x[xi]) - kx;
        const double b = static_cast<double>(y[yi]) - ky;
        sx += sign * a;
        sy += sign * b;
        sxx += sign * a * a;
        syy += sign * b * b;
        sxy += sign * a * b;
    };
    for (std::size_t i = 0; i < window; ++i) add(i, i + lag, 1.0);

    std::vector<std::optional<double>> out;
    out.reserve(points);
    const double w = static_cast<double>(window);
    for (std::size_t p = 0; p < points; ++p) {
        if (p > 0) {
            add(p - 1, p - 1 + lag, -1.0);
            add(p + window - 1, p + window - 1 + lag, 1.0);
        }
        const double vx = sxx - sx * sx / w;
        const double vy = syy - sy * sy / w;
        const bool flat_x = sxx * w == sx * sx;
        const bool flat_y = syy * w == sy * sy;
        if (flat_x || flat_y || vx <= 0.0 || vy <= 0.0) {
            out.emplace_back();
        } else {
            out.emplace_back(std::clamp((sxy - sx * sy / w) / std::sqrt(vx * vy), -1.0, 1.0));
        }
    }
    return out;
}

} // namespace detail

// Point ending on day d correlates x over [d-window+1-lag, d-lag] with
// y over [d-window+1, d]. A positive lag means the SMA stream leads.
inline RollingSeries rolling(const DailySeries& x_sma, const DailySeries& y_epa, std::size_t window_days,
                             std::size_t lag_days, RollingMode mode = RollingMode::TwoPass) {
    detail::check_rolling(x_sma, y_epa, window_days, lag_days);
    RollingSeries out{window_days, lag_days, {}};
    const std::size_t first_end = window_days - 1 + lag_days;
    const std::size_t n = y_epa.size();
    out.points.reserve(n - first_end);

    if (mode == RollingMode::Incremental) {
        auto rs = detail::incremental(x_sma.values(), y_epa.values(), window_days, lag_days);
        for (std::size_t i = 0; i < rs.size(); ++i)
            out.points.push_back({add_days(y_epa.start(), static_cast<std::int64_t>(first_end + i)), rs[i]});
        return out;
    }

    for (std::size_t end = first_end; end < n; ++end) {
        const std::size_t y0 = end + 1 - window_days;
        auto xs = x_sma.values().subspan(y0 - lag_days, window_days);
        auto ys = y_epa.values().subspan(y0, window_days);
        out.points.push_back({add_days(y_epa.start(), static_cast<std::int64_t>(end)), pearson(xs, ys)});
    }
    return out;
}

struct LagSummary {
    std::size_t lag = 0;
    std::size_t defined = 0;
    std::optional<double> mean;
    std::optional<double> min;
    std::optional<double> max;
};

struct LagScan {
    std::size_t window_days = 0;
    std::vector<LagSummary> summaries; // lags 1..max_lag
    std::vector<RollingSeries> series; // parallel to summaries
    std::optional<std::size_t> best_lag; // highest mean; lowest lag on ties
};

inline LagSummary summarize(const RollingSeries& s) {
    LagSummary out{s.lag_days, 0, {}, {}, {}};
    double sum = 0.0;
    for (const auto& p : s.points) {
        if (!p.r) continue;
        ++out.defined;
        sum += *p.r;
        out.min = out.min ? std::min(*out.min, *p.r) : *p.r;
        out.max = out.max ? std::max(*out.max, *p.r) : *p.r;
    }
    if (out.defined > 0) out.mean = sum / static_cast<double>(out.defined);
    return out;
}

inline LagScan lag_scan(const DailySeries& x_sma, const DailySeries& y_epa, std::size_t window_days,
                        std::size_t max_lag) {
    if (max_lag < 1) throw DimensionError("lag_scan: max_lag must be at least 1");
    detail::check_rolling(x_sma, y_epa, window_days, max_lag);
    LagScan scan;
    scan.window_days = window_days;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        scan.series.push_back(rolling(x_sma, y_epa, window_days, lag));
        scan.summaries.push_back(summarize(scan.series.back()));
        const auto& s = scan.summaries.back();
        if (s.mean && (!scan.best_lag || *s.mean > *scan.summaries[*scan.best_lag - 1].mean)) scan.best_lag = lag;
    }
    return scan;
}

// ---- serialization ----------------------------------------------------------
// Long format shared by every correlation output:
//   vendor,sma_type,epa_type,lag,end_date,r

inline constexpr const char* kLongHeader = "vendor,sma_type,epa_type,lag,end_date,r";

inline void write_matrix_rows(std::ostream& out, const VendorPanel& panel, const CorrelationMatrix& m) {
    const auto end = format_date(panel.end());
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t e = 0; e < 3; ++e)
            out << panel.vendor_id() << ',' << to_string(kSmaTypes[s]) << ',' << to_string(kEpaTypes[e]) << ",1,"
                << end << ',' << format_real(m.cells[s][e]) << '\n';
}

inline void write_rolling_rows(std::ostream& out, const std::string& vendor, ActivityType sma, ActivityType epa,
                               const RollingSeries& s) {
    for (const auto& p : s.points)
        out << vendor << ',' << to_string(sma) << ',' << to_string(epa) << ',' << s.lag_days << ','
            << format_date(p.end_date) << ',' << format_real(p.r) << '\n';
}

inline constexpr const char* kLagSummaryHeader = "vendor,sma_type,epa_type,lag,defined,mean,min,max,best_lag";

inline void write_lag_summary_rows(std::ostream& out, const std::string& vendor, ActivityType sma, ActivityType epa,
                                   const LagScan& scan) {
    const std::string best = scan.best_lag ? std::to_string(*scan.best_lag) : std::string{};
    for (const auto& s : scan.summaries)
        out << vendor << ',' << to_string(sma) << ',' << to_string(epa) << ',' << s.lag << ',' << s.defined << ','
            << format_real(s.mean) << ',' << format_real(s.min) << ',' << format_real(s.max) << ',' << best << '\n';
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const CorrelationMatrix& m) {
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    j["cols"] = nlohmann::ordered_json::array();
    for (auto t : kSmaTypes) j["rows"].push_back(std::string(to_string(t)));
    for (auto t : kEpaTypes) j["cols"].push_back(std::string(to_string(t)));
    auto& cells = j["cells"] = nlohmann::ordered_json::array();
    for (const auto& row : m.cells) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) r.push_back(optional_json(c));
        cells.push_back(std::move(r));
    }
    return j;
}

inline nlohmann::ordered_json to_json(const LagScan& scan) {
    nlohmann::ordered_json j;
    j["window_days"] = scan.window_days;
    j["best_lag"] = scan.best_lag ? nlohmann::ordered_json(*scan.best_lag) : nlohmann::ordered_json(nullptr);
    auto& lags = j["lags"] = nlohmann::ordered_json::array();
    for (const auto& s : scan.summaries) {
        lags.push_back({{"lag", s.lag},
                        {"defined", s.defined},
                        {"mean", optional_json(s.mean)},
                        {"min", optional_json(s.min)},
                        {"max", optional_json(s.max)}});
    }
    return j;
}

} // namespace smaepa::correlation
