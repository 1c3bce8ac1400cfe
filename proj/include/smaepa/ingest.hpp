#pragma once

// Loading of the canonical long-format CSV
//
//     date,vendor_id,activity_type,count
//     2016-01-01,V01,Post,3
//
// and assembly of the records into per-vendor panels.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "smaepa/core.hpp"

namespace smaepa::ingest {

inline constexpr std::string_view kHeader = "date,vendor_id,activity_type,count";

struct RawRecord {
    Date date;
    std::string vendor_id;
    ActivityType activity_type;
    Count count;

    friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct IngestWarning {
    std::size_t line; // 0 for warnings not tied to an input line
    std::string message;
};

struct IngestReport {
    std::size_t panels_built = 0;
    std::size_t rows_read = 0;
    std::size_t rows_rejected = 0;
    std::vector<IngestWarning> warnings;

    std::size_t rows_accepted() const noexcept { return rows_read - rows_rejected; }
};

inline nlohmann::ordered_json to_json(const IngestReport& r) {
    nlohmann::ordered_json j;
    j["panels_built"] = r.panels_built;
    j["rows_read"] = r.rows_read;
    j["rows_accepted"] = r.rows_accepted();
    j["rows_rejected"] = r.rows_rejected;
    auto& w = j["warnings"] = nlohmann::ordered_json::array();
    for (const auto& x : r.warnings) w.push_back({{"line", x.line}, {"message", x.message}});
    return j;
}

struct LoadOptions {
    bool strict = false;               // malformed rows become fatal
    bool aggregate_duplicates = false; // sum repeated (date, vendor, type) keys instead of failing
};

struct LoadResult {
    std::vector<RawRecord> records;
    IngestReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string key_string(const RawRecord& r) {
    return format_date(r.date) + ", " + r.vendor_id + ", " + std::string(to_string(r.activity_type));
}

// Throws RowError describing the first problem with the row.
inline RawRecord parse_row(std::string_view line, std::size_t line_no) {
    auto fields = split(line);
    if (fields.size() != 4) {
        throw RowError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    auto date = parse_date(fields[0]);
    if (!date) throw RowError(line_no, "unparsable date '" + std::string(fields[0]) + "'");
    if (fields[1].empty()) throw RowError(line_no, "empty vendor_id");
    auto type = parse_activity(fields[2]);
    if (!type) throw RowError(line_no, "unknown activity_type '" + std::string(fields[2]) + "'");

    auto c = fields[3];
    if (!c.empty() && c.front() == '-') throw RowError(line_no, "negative count");
    Count value = 0;
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), value);
    if (c.empty() || ec != std::errc{} || ptr != c.data() + c.size()) {
        throw RowError(line_no, "invalid count '" + std::string(c) + "'");
    }
    return {*date, std::string(fields[1]), *type, value};
}

} // namespace detail

inline LoadResult parse_csv(std::istream& in, const LoadOptions& options = {}) {
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw SchemaError("missing header row; expected '" + std::string(kHeader) + "'");
    ++line_no;
    std::string_view header = line;
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    header = detail::trim(header);
    {
        auto cols = detail::split(header);
        std::string normalized;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) normalized += ',';
            for (char ch : cols[i]) normalized += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        if (normalized != kHeader) {
            throw SchemaError("invalid header '" + std::string(header) + "'; expected '" + std::string(kHeader) + "'");
        }
    }

    using Key = std::tuple<std::string, Date, ActivityType>;
    std::map<Key, std::size_t> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        ++result.report.rows_read;
        try {
            auto rec = detail::parse_row(line, line_no);
            Key key{rec.vendor_id, rec.date, rec.activity_type};
            if (auto it = seen.find(key); it != seen.end()) {
                if (!options.aggregate_duplicates) throw DuplicateRowError(detail::key_string(rec));
                result.records[it->second].count += rec.count;
                continue;
            }
            seen.emplace(std::move(key), result.records.size());
            result.records.push_back(std::move(rec));
        } catch (const RowError& e) {
            if (options.strict) throw;
            ++result.report.rows_rejected;
            result.report.warnings.push_back({e.line(), e.reason()});
        }
    }
    return result;
}

inline LoadResult load_csv(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    try {
        return parse_csv(in, options);
    } catch (const RowError& e) {
        throw RowError(e.line(), path + ": " + e.reason());
    }
}

// Groups records by vendor and assembles one panel per vendor spanning its
// own min..max observed date. Unobserved cells are zero under ZeroFill; under
// Strict every (date, type) cell of the span must be present.
inline std::map<std::string, VendorPanel> build_panels(const std::vector<RawRecord>& records, FillPolicy policy,
                                                       IngestReport* report = nullptr,
                                                       const std::map<std::string, std::string>& categories = {}) {
    struct Cell {
        Count value = 0;
        bool observed = false;
    };
    struct VendorRows {
        Date lo = Date::max();
        Date hi = Date::min();
        std::vector<const RawRecord*> rows;
    };

    std::map<std::string, VendorRows> by_vendor;
    for (const auto& r : records) {
        auto& v = by_vendor[r.vendor_id];
        v.lo = std::min(v.lo, r.date);
        v.hi = std::max(v.hi, r.date);
        v.rows.push_back(&r);
    }

    std::map<std::string, VendorPanel> panels;
    for (const auto& [vendor, rows] : by_vendor) {
        const auto n = static_cast<std::size_t>(days_between(rows.lo, rows.hi)) + 1;
        std::array<std::vector<Cell>, kActivityCount> grid;
        for (auto& g : grid) g.assign(n, Cell{});
        bool any_sma = false;
        for (const auto* r : rows.rows) {
            auto& cell = grid[index_of(r->activity_type)][static_cast<std::size_t>(days_between(rows.lo, r->date))];
            if (cell.observed) {
                throw DuplicateRowError(detail::key_string(*r));
            }
            cell = {r->count, true};
            any_sma = any_sma || is_sma(r->activity_type);
        }
        if (!any_sma) {
            if (report) report->warnings.push_back({0, "vendor '" + vendor + "' has no social-media rows; skipped"});
            continue;
        }

        std::map<ActivityType, DailySeries> series;
        std::vector<ActivityType> holes;
        for (auto t : kAllActivities) {
            std::vector<Count> values(n);
            bool complete = true;
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = grid[index_of(t)][i].value;
                complete = complete && grid[index_of(t)][i].observed;
            }
            if (!complete) holes.push_back(t);
            series.emplace(t, DailySeries(rows.lo, std::move(values)));
        }
        if (policy == FillPolicy::Strict && !holes.empty()) throw AlignmentError(std::move(holes));

        auto cat = categories.find(vendor);
        panels.emplace(vendor, align(series, policy, vendor, cat == categories.end() ? std::string{} : cat->second));
    }
    if (report) report->panels_built = panels.size();
    return panels;
}

// Writes a panel in the ingest schema: every non-zero cell, plus all six
// types on the first and last day so the date span survives re-ingestion.
inline void write_panel_csv(std::ostream& out, const VendorPanel& panel) {
    const auto n = panel.days();
    for (std::size_t i = 0; i < n; ++i) {
        const auto date = format_date(add_days(panel.start(), static_cast<std::int64_t>(i)));
        const bool boundary = i == 0 || i + 1 == n;
        for (auto t : kAllActivities) {
            const auto v = panel.stream(t)[i];
            if (v != 0 || boundary) out << date << ',' << panel.vendor_id() << ',' << to_string(t) << ',' << v << '\n';
        }
    }
}

inline void write_csv(std::ostream& out, const std::map<std::string, VendorPanel>& panels) {
    out << kHeader << '\n';
    for (const auto& [id, p] : panels) write_panel_csv(out, p);
}

} // namespace smaepa::ingest
