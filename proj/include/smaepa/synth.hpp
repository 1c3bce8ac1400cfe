#pragma once

// Synthetic vendor panels with an optional planted social -> commerce coupling.
//
// Generative model (our own construction, not fitted to any real platform):
//
//   Post_t     ~ Poisson(base_Post * week(t) * event(t))
//   Repost_t   ~ Poisson(alpha_Repost * Post_t + base_Repost)
//   Comment_t  ~ Poisson(alpha_Comment * Post_t + base_Comment)
//   EPA_e,t    ~ Poisson(base_e * week(t) * event(t)
//                        * exp(sum_s beta_{s,e} * z_s(t - L))
//                        * exp(noise_scale * N_e,t))
//
// z_s is stream s standardized by its own mean and population stdev over the
// generated history (0 before the first day or when the stream is constant).
// N_e,t is a standard normal draw.
//
// Randomness: every (stream, day) cell owns a SplitMix64 generator keyed by
// derive(seed, stream index, day), so cells never depend on generation order.
// Poisson variates use sequential-search inversion for means below
// kPoissonNormalCutoff and round(mean + sqrt(mean) * Z) (clamped at 0) above it,
// with Z from Box-Muller.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "smaepa/core.hpp"
#include "smaepa/rng.hpp"

namespace smaepa::synth {

inline constexpr double kPoissonNormalCutoff = 30.0;

struct SpikeEvent {
    std::int64_t day_offset;
    double multiplier;
};

struct Coupling {
    ActivityType sma;
    ActivityType epa;
    double beta;
};

struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t days = 0;
    Date start_date = make_date(2016, 1, 1);
    std::string vendor_id = "V01";
    std::string category;
    std::array<double, kActivityCount> base_rates{3.0, 30.0, 20.0, 200.0, 100.0, 20.0};
    std::array<double, 7> weekly_profile{1, 1, 1, 1, 1, 1, 1}; // Monday first
    std::vector<SpikeEvent> event_days;
    std::vector<Coupling> coupling;
    double amplification_repost = 0.0; // alpha for Repost
    double amplification_comment = 0.0;
    std::size_t lag_days = 1;
    double noise_scale = 0.0;

    double base(ActivityType t) const noexcept { return base_rates[index_of(t)]; }

    double beta(ActivityType sma, ActivityType epa) const noexcept {
        double b = 0.0;
        for (const auto& c : coupling)
            if (c.sma == sma && c.epa == epa) b += c.beta;
        return b;
    }
};

inline void validate(const SynthConfig& c) {
    if (c.days < c.lag_days + 30) {
        throw ConfigError("days (" + std::to_string(c.days) + ") must be at least lag_days + 30 (" +
                          std::to_string(c.lag_days + 30) + ")");
    }
    for (auto t : kAllActivities) {
        if (!(c.base(t) > 0.0) || !std::isfinite(c.base(t)))
            throw ConfigError("base rate for " + std::string(to_string(t)) + " must be positive");
    }
    for (double w : c.weekly_profile)
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weekly_profile multipliers must be positive");
    for (const auto& e : c.event_days) {
        if (!(e.multiplier > 0.0)) throw ConfigError("event multipliers must be positive");
        if (e.day_offset < 0 || static_cast<std::size_t>(e.day_offset) >= c.days)
            throw ConfigError("event day offset " + std::to_string(e.day_offset) + " outside generated range");
    }
    for (const auto& cp : c.coupling) {
        if (!is_sma(cp.sma) || !is_epa(cp.epa)) throw ConfigError("coupling must map a social type to a commerce type");
        if (!std::isfinite(cp.beta)) throw ConfigError("coupling coefficient must be finite");
    }
    if (c.amplification_repost < 0.0 || c.amplification_comment < 0.0)
        throw ConfigError("amplification must be non-negative");
    if (c.noise_scale < 0.0 || !std::isfinite(c.noise_scale)) throw ConfigError("noise_scale must be non-negative");
}

inline Count poisson(double mean, rng::SplitMix64& gen) {
    if (!(mean > 0.0)) return 0;
    if (mean < kPoissonNormalCutoff) {
        const double u = gen.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        Count k = 0;
        while (u > cdf && k < 10'000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
            if (p == 0.0) break;
        }
        return k;
    }
    const double x = std::floor(mean + std::sqrt(mean) * gen.normal() + 0.5);
    return x <= 0.0 ? 0 : static_cast<Count>(x);
}

namespace detail {

inline rng::SplitMix64 cell_rng(std::uint64_t seed, ActivityType t, std::size_t day, std::uint64_t purpose = 0) {
    return rng::SplitMix64(rng::derive({seed, index_of(t), day, purpose}));
}

inline std::vector<double> standardize(const std::vector<Count>& v) {
    double mean = 0.0;
    for (auto x : v) mean += static_cast<double>(x);
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (auto x : v) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    std::vector<double> z(v.size(), 0.0);
    if (sd > 0.0)
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = (static_cast<double>(v[i]) - mean) / sd;
    return z;
}

} // namespace detail

inline VendorPanel generate(const SynthConfig& c) {
    validate(c);
    const std::size_t n = c.days;

    std::vector<double> season(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::chrono::weekday wd{add_days(c.start_date, static_cast<std::int64_t>(t))};
        season[t] = c.weekly_profile[wd.iso_encoding() - 1];
    }
    for (const auto& e : c.event_days) season[static_cast<std::size_t>(e.day_offset)] *= e.multiplier;

    std::array<std::vector<Count>, kActivityCount> v;
    for (auto& s : v) s.resize(n);

    for (std::size_t t = 0; t < n; ++t) {
        auto g = detail::cell_rng(c.seed, ActivityType::Post, t);
        v[index_of(ActivityType::Post)][t] = poisson(c.base(ActivityType::Post) * season[t], g);
    }
    for (std::size_t t = 0; t < n; ++t) {
        const double post = static_cast<double>(v[index_of(ActivityType::Post)][t]);
        auto gr = detail::cell_rng(c.seed, ActivityType::Repost, t);
        v[index_of(ActivityType::Repost)][t] =
            poisson(c.amplification_repost * post + c.base(ActivityType::Repost), gr);
        auto gc = detail::cell_rng(c.seed, ActivityType::Comment, t);
        v[index_of(ActivityType::Comment)][t] =
            poisson(c.amplification_comment * post + c.base(ActivityType::Comment), gc);
    }

    std::array<std::vector<double>, 3> z;
    for (std::size_t s = 0; s < 3; ++s) z[s] = detail::standardize(v[index_of(kSmaTypes[s])]);

    for (auto e : kEpaTypes) {
        std::array<double, 3> betas{};
        for (std::size_t s = 0; s < 3; ++s) betas[s] = c.beta(kSmaTypes[s], e);
        for (std::size_t t = 0; t < n; ++t) {
            double tilt = 0.0;
            if (t >= c.lag_days)
                for (std::size_t s = 0; s < 3; ++s) tilt += betas[s] * z[s][t - c.lag_days];
            double rate = c.base(e) * season[t] * std::exp(tilt);
            if (c.noise_scale > 0.0) {
                auto gn = detail::cell_rng(c.seed, e, t, 1);
                rate *= std::exp(c.noise_scale * gn.normal());
            }
            auto g = detail::cell_rng(c.seed, e, t);
            v[index_of(e)][t] = poisson(rate, g);
        }
    }

    return VendorPanel(c.vendor_id, c.category,
                       {DailySeries(c.start_date, std::move(v[0])), DailySeries(c.start_date, std::move(v[1])),
                        DailySeries(c.start_date, std::move(v[2])), DailySeries(c.start_date, std::move(v[3])),
                        DailySeries(c.start_date, std::move(v[4])), DailySeries(c.start_date, std::move(v[5]))});
}

// A multi-vendor synthetic dataset: `vendors` panels cloned from one template,
// each with its own derived seed, id "V01".."Vnn" and a category taken round-robin.
struct SynthDataset {
    SynthConfig base;
    std::size_t vendors = 1;
    std::vector<std::string> categories;
};

inline SynthConfig vendor_config(const SynthDataset& d, std::size_t i) {
    SynthConfig c = d.base;
    if (d.vendors > 1) {
        c.seed = rng::derive({d.base.seed, i});
        char id[16];
        std::snprintf(id, sizeof id, "V%02zu", i + 1);
        c.vendor_id = id;
    }
    if (!d.categories.empty()) c.category = d.categories[i % d.categories.size()];
    return c;
}

inline std::vector<VendorPanel> generate(const SynthDataset& d) {
    std::vector<VendorPanel> out;
    out.reserve(d.vendors);
    for (std::size_t i = 0; i < d.vendors; ++i) out.push_back(generate(vendor_config(d, i)));
    return out;
}

// JSON form. Required: seed, days. Everything else defaults as in SynthConfig.
//
// {"seed": 7, "days": 731, "start_date": "2016-01-01", "lag_days": 3,
//  "base_rates": {"Post": 3, "Order": 20}, "weekly_profile": [1,1,1,1,1,1.2,1.2],
//  "event_days": [{"offset": 314, "multiplier": 10}],
//  "coupling": [{"sma": "Comment", "epa": "Order", "beta": 1.5}],
//  "amplification": {"Repost": 2.0, "Comment": 1.0}, "noise_scale": 0.1,
//  "vendors": 33, "categories": ["P/E", "Sports", "Food", "Clothes", "Home"]}
inline SynthDataset dataset_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
    auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw ConfigError(std::string("missing field: ") + key);
        return j.at(key);
    };
    auto activity = [](const std::string& s) {
        auto t = parse_activity(s);
        if (!t) throw ConfigError("unknown activity type '" + s + "'");
        return *t;
    };

    SynthDataset d;
    SynthConfig& c = d.base;
    try {
        c.seed = need("seed").get<std::uint64_t>();
        auto days = need("days").get<std::int64_t>();
        if (days <= 0) throw ConfigError("days must be positive");
        c.days = static_cast<std::size_t>(days);
        if (j.contains("start_date")) {
            auto s = j.at("start_date").get<std::string>();
            auto dt = parse_date(s);
            if (!dt) throw ConfigError("invalid start_date '" + s + "'");
            c.start_date = *dt;
        }
        if (j.contains("vendor_id")) c.vendor_id = j.at("vendor_id").get<std::string>();
        if (j.contains("category")) c.category = j.at("category").get<std::string>();
        if (j.contains("base_rates"))
            for (auto& [k, val] : j.at("base_rates").items()) c.base_rates[index_of(activity(k))] = val.get<double>();
        if (j.contains("weekly_profile")) {
            auto w = j.at("weekly_profile").get<std::vector<double>>();
            if (w.size() != 7) throw ConfigError("weekly_profile must have exactly 7 entries");
            std::copy(w.begin(), w.end(), c.weekly_profile.begin());
        }
        if (j.contains("event_days"))
            for (const auto& e : j.at("event_days"))
                c.event_days.push_back({e.at("offset").get<std::int64_t>(), e.at("multiplier").get<double>()});
        if (j.contains("coupling"))
            for (const auto& e : j.at("coupling"))
                c.coupling.push_back({activity(e.at("sma").get<std::string>()),
                                      activity(e.at("epa").get<std::string>()), e.at("beta").get<double>()});
        if (j.contains("amplification")) {
            for (auto& [k, val] : j.at("amplification").items()) {
                auto t = activity(k);
                if (t == ActivityType::Repost) c.amplification_repost = val.get<double>();
                else if (t == ActivityType::Comment) c.amplification_comment = val.get<double>();
                else throw ConfigError("amplification applies to Repost or Comment only");
            }
        }
        if (j.contains("lag_days")) {
            auto l = j.at("lag_days").get<std::int64_t>();
            if (l < 0) throw ConfigError("lag_days must be non-negative");
            c.lag_days = static_cast<std::size_t>(l);
        }
        if (j.contains("noise_scale")) c.noise_scale = j.at("noise_scale").get<double>();
        if (j.contains("vendors")) {
            auto n = j.at("vendors").get<std::int64_t>();
            if (n < 1) throw ConfigError("vendors must be at least 1");
            d.vendors = static_cast<std::size_t>(n);
        }
        if (j.contains("categories")) d.categories = j.at("categories").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid synth config: ") + e.what());
    }
    validate(c);
    return d;
}

} // namespace smaepa::synth
