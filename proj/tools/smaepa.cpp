// smaepa: social-media vs. commerce activity analysis from the command line.
//
// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "smaepa/correlation.hpp"
#include "smaepa/features.hpp"
#include "smaepa/ingest.hpp"
#include "smaepa/report.hpp"
#include "smaepa/run_config.hpp"
#include "smaepa/synth.hpp"

namespace fs = std::filesystem;
using namespace smaepa;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : Error {
    using Error::Error;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json parse_json_file(const fs::path& p) {
    const auto text = read_file(p);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

// Output directory <out>/<command>-<hash of inputs and settings>. The name is
// stable across reruns, so identical runs land in (and rewrite) the same place.
class RunDir {
public:
    RunDir(std::string command, Json settings) : command_(std::move(command)), settings_(std::move(settings)) {}

    void add_input(const fs::path& p) {
        const auto digest = hex64(rng::fnv1a(read_file(p)));
        inputs_.push_back({{"file", p.filename().string()}, {"fnv1a", digest}});
    }

    fs::path create(const fs::path& base) {
        const auto id = hex64(rng::fnv1a(manifest().dump()));
        dir_ = base / (command_ + "-" + id.substr(0, 12));
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create '" + dir_.string() + "': " + ec.message());
        return dir_;
    }

    void write(const std::string& name, const std::string& content) {
        write_file(dir_ / name, content);
        outputs_.push_back(name);
    }

    void finish() {
        auto m = manifest();
        m["outputs"] = outputs_;
        write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    const fs::path& path() const { return dir_; }

private:
    Json manifest() const {
        Json m;
        m["tool"] = "smaepa";
        m["version"] = kVersion;
        m["command"] = command_;
        m["inputs"] = inputs_;
        m["settings"] = settings_;
        return m;
    }

    std::string command_;
    Json settings_;
    Json inputs_ = Json::array();
    std::vector<std::string> outputs_;
    fs::path dir_;
};

struct InputOptions {
    std::string path;
    bool strict = false;
    bool aggregate = false;
    std::string fill = "zero";
    std::string categories;
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
    cmd->add_option("--input,-i", o.path, "Activity CSV (date,vendor_id,activity_type,count)")->required();
    cmd->add_flag("--strict", o.strict, "Treat malformed rows as fatal");
    cmd->add_flag("--aggregate-duplicates", o.aggregate, "Sum repeated (date, vendor, type) rows");
    cmd->add_option("--fill", o.fill, "Missing cells: zero or strict")->check(CLI::IsMember({"zero", "strict"}));
    cmd->add_option("--categories", o.categories, "JSON object mapping vendor id to category");
}

Json input_settings(const InputOptions& o) {
    return {{"strict", o.strict}, {"aggregate_duplicates", o.aggregate}, {"fill_policy", o.fill}};
}

struct Loaded {
    std::vector<VendorPanel> panels;
    ingest::IngestReport report;
};

Loaded load_panels(const std::string& path, bool strict, bool aggregate, FillPolicy fill,
                   const std::map<std::string, std::string>& categories) {
    auto loaded = ingest::load_csv(path, {strict, aggregate});
    Loaded out;
    out.report = std::move(loaded.report);
    auto panels = ingest::build_panels(loaded.records, fill, &out.report, categories);
    for (auto& [id, p] : panels) out.panels.push_back(std::move(p));
    return out;
}

void print_warnings(const ingest::IngestReport& r) {
    for (const auto& w : r.warnings) {
        if (w.line) std::cerr << "warning: line " << w.line << ": " << w.message << '\n';
        else std::cerr << "warning: " << w.message << '\n';
    }
}

FillPolicy parse_fill(const std::string& s) { return s == "strict" ? FillPolicy::Strict : FillPolicy::ZeroFill; }

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
    std::string config, out, categories_out;
};

int cmd_synth(const SynthArgs& a) {
    const auto dataset = synth::dataset_from_json(parse_json_file(a.config));
    const auto panels = synth::generate(dataset);

    std::ostringstream csv;
    csv << ingest::kHeader << '\n';
    std::map<std::string, std::string> categories;
    for (const auto& p : panels) {
        ingest::write_panel_csv(csv, p);
        if (!p.category().empty()) categories[p.vendor_id()] = p.category();
    }
    write_file(a.out, csv.str());
    if (!a.categories_out.empty()) write_file(a.categories_out, Json(categories).dump(2) + "\n");

    for (const auto& p : panels) {
        std::cout << p.vendor_id() << ' ' << format_date(p.start()) << ".." << format_date(p.end()) << ' '
                  << p.days() << " days";
        if (!p.category().empty()) std::cout << " [" << p.category() << ']';
        for (auto t : kAllActivities) {
            Count total = 0;
            for (auto v : p.stream(t).values()) total += v;
            std::cout << ' ' << to_string(t) << '=' << total;
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

// ---- ingest-check -----------------------------------------------------------

int cmd_ingest_check(const InputOptions& o) {
    std::map<std::string, std::string> categories;
    if (!o.categories.empty()) categories = read_categories(o.categories);
    auto loaded = load_panels(o.path, o.strict, o.aggregate, parse_fill(o.fill), categories);
    auto j = ingest::to_json(loaded.report);
    auto& vendors = j["vendors"] = Json::array();
    for (const auto& p : loaded.panels) {
        vendors.push_back({{"vendor_id", p.vendor_id()},
                           {"category", p.category()},
                           {"start", format_date(p.start())},
                           {"end", format_date(p.end())},
                           {"days", p.days()}});
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

// ---- correlate --------------------------------------------------------------

struct CorrelateArgs {
    InputOptions in;
    std::size_t window = 30;
    std::size_t max_lag = 15;
    std::string out_dir;
};

int cmd_correlate(const CorrelateArgs& a) {
    if (a.window < 2) throw UsageError("--window must be at least 2");
    if (a.max_lag < 1) throw UsageError("--max-lag must be at least 1");
    auto loaded = load_panels(a.in.path, a.in.strict, a.in.aggregate, parse_fill(a.in.fill), {});
    print_warnings(loaded.report);

    auto settings = input_settings(a.in);
    settings["window"] = a.window;
    settings["max_lag"] = a.max_lag;
    RunDir run("correlate", settings);
    run.add_input(a.in.path);
    run.create(a.out_dir);

    std::ostringstream matrix, rolling, lags;
    matrix << correlation::kLongHeader << '\n';
    rolling << correlation::kLongHeader << '\n';
    lags << correlation::kLagSummaryHeader << '\n';
    Json all = Json::object();
    for (const auto& p : loaded.panels) {
        Json jv;
        const auto m = correlation::next_day_matrix(p);
        correlation::write_matrix_rows(matrix, p, m);
        jv["next_day"] = correlation::to_json(m);
        auto& scans = jv["lag_scans"] = Json::array();
        for (auto s : kSmaTypes) {
            for (auto e : kEpaTypes) {
                if (p.days() < a.window + a.max_lag) {
                    std::cerr << "warning: " << p.vendor_id() << " has " << p.days()
                              << " days, too short for the lag scan\n";
                    continue;
                }
                const auto scan = correlation::lag_scan(p.stream(s), p.stream(e), a.window, a.max_lag);
                correlation::write_rolling_rows(rolling, p.vendor_id(), s, e, scan.series.front());
                correlation::write_lag_summary_rows(lags, p.vendor_id(), s, e, scan);
                auto js = correlation::to_json(scan);
                scans.push_back({{"sma_type", std::string(to_string(s))},
                                 {"epa_type", std::string(to_string(e))},
                                 {"scan", std::move(js)}});
            }
        }
        all[p.vendor_id()] = std::move(jv);
    }
    run.write("next_day_matrix.csv", matrix.str());
    run.write("rolling.csv", rolling.str());
    run.write("lag_summary.csv", lags.str());
    run.write("correlation.json", all.dump(2) + "\n");
    run.finish();
    std::cout << run.path().string() << '\n';
    return 0;
}

// ---- features ---------------------------------------------------------------

struct FeaturesArgs {
    InputOptions in;
    std::string out_dir;
    std::string epa;
    int horizon = 1;
    int q = 3;
};

int cmd_features(const FeaturesArgs& a) {
    std::optional<labeling::PredictionTask> task;
    if (!a.epa.empty()) {
        auto e = parse_activity(a.epa);
        if (!e || !is_epa(*e)) throw UsageError("--epa must be Search, Clickthrough or Order");
        task = labeling::PredictionTask{*e, a.horizon, a.q};
        labeling::validate(*task);
    }
    auto loaded = load_panels(a.in.path, a.in.strict, a.in.aggregate, parse_fill(a.in.fill), {});
    print_warnings(loaded.report);

    auto settings = input_settings(a.in);
    if (task) settings["task"] = labeling::describe(*task);
    RunDir run("features", settings);
    run.add_input(a.in.path);
    run.create(a.out_dir);

    std::ostringstream feat;
    features::write_feature_header(feat);
    feat << '\n';
    for (const auto& p : loaded.panels) {
        for (const auto& f : features::build_feature_matrix(p)) {
            features::write_feature_row(feat, p.vendor_id(), f);
            feat << '\n';
        }
    }
    run.write("features.csv", feat.str());

    if (task) {
        std::ostringstream data;
        Json schemes = Json::object();
        labeling::write_dataset_header(data);
        for (const auto& p : loaded.panels) {
            const auto d = labeling::build_dataset(p, *task, p.range());
            labeling::write_dataset_rows(data, p.vendor_id(), d);
            schemes[p.vendor_id()] = labeling::to_json(d.scheme);
        }
        run.write("dataset.csv", data.str());
        run.write("schemes.json", schemes.dump(2) + "\n");
    }
    run.finish();
    std::cout << run.path().string() << '\n';
    return 0;
}

// ---- experiment / report ----------------------------------------------------

void write_report_outputs(RunDir& run, const eval::ExperimentReport& r) {
    for (auto k : r.kinds) {
        const std::string name(learn::to_string(k));
        run.write("table_quantiles_" + name + ".csv", report::table_quantile_stats(r, k));
        run.write("table_horizons_" + name + ".csv", report::table_horizons(r, k));
    }
    run.write("table_top_features.csv", report::table_top_features(r));
}

struct ExperimentArgs {
    std::string input, config, out_dir;
    std::size_t threads = 0;
    bool allow_partial = false;
};

int cmd_experiment(const ExperimentArgs& a) {
    const fs::path config_path(a.config);
    const auto cfg = run_config_from_json(parse_json_file(config_path), config_path.parent_path());
    auto loaded = load_panels(a.input, cfg.strict, cfg.aggregate_duplicates, cfg.fill, cfg.categories);
    print_warnings(loaded.report);
    if (loaded.panels.empty()) throw InsufficientData("no vendor panels in '" + a.input + "'");
    for (const auto& p : loaded.panels) eval::make_folds(p.range()); // span check before any work

    eval::ExperimentConfig ec;
    ec.master_seed = cfg.master_seed;
    ec.forest = cfg.forest;
    ec.logistic = cfg.logistic;
    ec.threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());

    RunDir run("experiment", to_json(cfg));
    run.add_input(a.input);
    run.create(a.out_dir);

    const auto r = eval::run_experiment(loaded.panels, cfg.tasks, cfg.models, ec);
    run.write("report.json", report::to_json(r).dump(2) + "\n");
    write_report_outputs(run, r);
    run.finish();

    std::cout << report::summary_text(r);
    for (const auto& u : r.units)
        if (u.error)
            std::cerr << "unit failed: " << learn::to_string(u.kind) << ' ' << u.vendor << ' '
                      << labeling::describe(u.task) << ": " << *u.error << '\n';
    std::cout << run.path().string() << '\n';

    const auto failed = r.failed_units();
    if (failed == 0) return 0;
    if (a.allow_partial && failed < r.units.size()) {
        std::cerr << "partial report: " << failed << " of " << r.units.size() << " units failed\n";
        return 0;
    }
    std::cerr << "error: " << failed << " of " << r.units.size() << " units failed"
              << (a.allow_partial ? "" : " (use --allow-partial to accept a partial report)") << '\n';
    return 1;
}

struct ReportArgs {
    std::string report, out_dir;
};

int cmd_report(const ReportArgs& a) {
    const auto r = report::report_from_json(parse_json_file(a.report));
    RunDir run("report", Json::object());
    run.add_input(a.report);
    run.create(a.out_dir);
    write_report_outputs(run, r);
    run.finish();
    std::cout << report::summary_text(r);
    std::cout << run.path().string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social-media and e-commerce activity analysis"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic activity CSV");
    synth_cmd->add_option("--config,-c", synth_args.config, "Synthetic dataset JSON")->required();
    synth_cmd->add_option("--out,-o", synth_args.out, "Output CSV")->required();
    synth_cmd->add_option("--categories-out", synth_args.categories_out, "Write vendor categories as JSON");

    InputOptions check_args;
    auto* check_cmd = app.add_subcommand("ingest-check", "Validate an activity CSV and report its panels");
    add_input_options(check_cmd, check_args);

    CorrelateArgs corr_args;
    auto* corr_cmd = app.add_subcommand("correlate", "Next-day matrices, rolling correlations and lag scans");
    add_input_options(corr_cmd, corr_args.in);
    corr_cmd->add_option("--window", corr_args.window, "Rolling window in days");
    corr_cmd->add_option("--max-lag", corr_args.max_lag, "Largest SMA lead in days");
    corr_cmd->add_option("--out-dir,-o", corr_args.out_dir, "Output base directory")->required();

    FeaturesArgs feat_args;
    auto* feat_cmd = app.add_subcommand("features", "Export the 66-feature matrix, optionally labeled");
    add_input_options(feat_cmd, feat_args.in);
    feat_cmd->add_option("--out-dir,-o", feat_args.out_dir, "Output base directory")->required();
    feat_cmd->add_option("--epa", feat_args.epa, "Label with this commerce activity");
    feat_cmd->add_option("--horizon", feat_args.horizon, "Target horizon in days");
    feat_cmd->add_option("--q", feat_args.q, "Number of quantile classes");

    ExperimentArgs exp_args;
    auto* exp_cmd = app.add_subcommand("experiment", "Cross-validated forest and logistic evaluation");
    exp_cmd->add_option("--input,-i", exp_args.input, "Activity CSV")->required();
    exp_cmd->add_option("--config,-c", exp_args.config, "Run config JSON")->required();
    exp_cmd->add_option("--out-dir,-o", exp_args.out_dir, "Output base directory")->required();
    exp_cmd->add_option("--threads,-j", exp_args.threads, "Worker threads (0 = all cores)");
    exp_cmd->add_flag("--allow-partial", exp_args.allow_partial, "Exit 0 when some units failed");

    ReportArgs rep_args;
    auto* rep_cmd = app.add_subcommand("report", "Rebuild tables from a report.json");
    rep_cmd->add_option("--report,-r", rep_args.report, "report.json from an experiment run")->required();
    rep_cmd->add_option("--out-dir,-o", rep_args.out_dir, "Output base directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth_args);
        if (*check_cmd) return cmd_ingest_check(check_args);
        if (*corr_cmd) return cmd_correlate(corr_args);
        if (*feat_cmd) return cmd_features(feat_args);
        if (*exp_cmd) return cmd_experiment(exp_args);
        if (*rep_cmd) return cmd_report(rep_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "range error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
