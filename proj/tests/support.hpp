#pragma once

// Hand-rolled generators for property tests.

#include <cstdint>
#include <map>
#include <vector>

#include "smaepa/core.hpp"
#include "smaepa/rng.hpp"

namespace smaepa::testkit {

struct Gen {
    rng::SplitMix64 rng;

    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::size_t size(std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }
    double real(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
    Count count(Count hi) { return rng.below(hi + 1); }

    std::vector<double> reals(std::size_t n, double lo = -100.0, double hi = 100.0) {
        std::vector<double> v(n);
        for (auto& x : v) x = real(lo, hi);
        return v;
    }

    std::vector<Count> counts(std::size_t n, Count hi = 50) {
        std::vector<Count> v(n);
        for (auto& x : v) x = count(hi);
        return v;
    }

    // Series with occasional flat stretches so undefined windows occur.
    std::vector<Count> lumpy_counts(std::size_t n, Count hi = 50) {
        std::vector<Count> v(n);
        std::size_t i = 0;
        while (i < n) {
            if (rng.below(8) == 0) {
                const auto run = size(3, 40);
                const auto c = count(hi);
                for (std::size_t k = 0; k < run && i < n; ++k) v[i++] = c;
            } else {
                v[i++] = count(hi);
            }
        }
        return v;
    }

    VendorPanel panel(std::size_t days, Date start = make_date(2016, 1, 1), std::string id = "V01", Count hi = 50) {
        return VendorPanel(id, "", {DailySeries(start, counts(days, hi)), DailySeries(start, counts(days, hi)),
                                    DailySeries(start, counts(days, hi)), DailySeries(start, counts(days, hi)),
                                    DailySeries(start, counts(days, hi)), DailySeries(start, counts(days, hi))});
    }
};

inline VendorPanel panel_from(const std::map<ActivityType, std::vector<Count>>& streams, Date start,
                              std::string id = "V01") {
    std::map<ActivityType, DailySeries> m;
    for (const auto& [t, v] : streams) m.emplace(t, DailySeries(start, v));
    return align(m, FillPolicy::ZeroFill, std::move(id));
}

// Panel whose six streams are all equal to `v`.
inline VendorPanel uniform_panel(const std::vector<Count>& v, Date start = make_date(2016, 1, 1)) {
    std::map<ActivityType, std::vector<Count>> m;
    for (auto t : kAllActivities) m[t] = v;
    return panel_from(m, start);
}

} // namespace smaepa::testkit
