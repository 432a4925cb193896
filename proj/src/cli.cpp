#include "paynet/cli.hpp"

#include "paynet/config.hpp"
#include "paynet/dataset.hpp"
#include "paynet/evaluate.hpp"
#include "paynet/report.hpp"
#include "paynet/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace paynet {

namespace fs = std::filesystem;

namespace {

struct Sample {
    std::optional<IndustryRoster> roster;
    std::vector<PairTotals> quarters;
    std::string dataset_hash = hex64(0);
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
    auto out = open_output(path);
    fn(out);
    close_output(out, path);
}

Sample load_sample(const RunConfig& c, std::ostream& err) {
    Sample s;
    std::vector<PaymentRecord> records;
    Quarter first_default, last_default;
    if (c.input) {
        ParseOptions opts;
        if (c.roster) {
            std::ifstream rin(*c.roster);
            if (!rin) throw ConfigError("cannot open roster '" + *c.roster + "'");
            opts.roster = IndustryRoster::read_csv(rin);
        }
        if (c.first) opts.first_month = c.first->first_month();
        if (c.last) opts.last_month = c.last->last_month();
        std::ifstream in(*c.input);
        if (!in) throw DataError("cannot open input '" + *c.input + "'");
        auto parsed = parse_records(in, opts);
        if (!parsed.rejects.empty()) {
            err << "ingest: " << parsed.rejects.size() << " of " << parsed.data_lines << " data lines rejected\n";
            std::map<std::string, std::size_t> reasons;
            for (const auto& r : parsed.rejects) ++reasons[r.reason];
            for (const auto& [reason, count] : reasons) err << "  " << count << " x " << reason << '\n';
        }
        if (parsed.data_lines > 0 && parsed.records.empty())
            throw DataError("ingest: all " + std::to_string(parsed.data_lines) + " data lines were rejected");
        records = std::move(parsed.records);
        s.roster = std::move(parsed.roster);
        if (records.empty()) return s;
        first_default = Quarter::of(records.front().period);
        last_default = first_default;
        for (const auto& r : records) {
            first_default = std::min(first_default, Quarter::of(r.period));
            last_default = std::max(last_default, Quarter::of(r.period));
        }
    } else {
        auto synth = synth_generate(c.synth, c.seed);
        records = std::move(synth.records);
        s.roster = std::move(synth.roster);
        first_default = c.synth.first;
        last_default = c.synth.last;
    }
    if (!s.roster) return s;
    const auto by_quarter = aggregate_quarterly(records, *s.roster, AggregateOptions{c.keep_self_flows});
    s.quarters = contiguous_quarters(by_quarter, c.first.value_or(first_default), c.last.value_or(last_default));
    s.dataset_hash = hex64(dataset_hash(s.quarters));
    return s;
}

RunHeader header_for(const RunConfig& c, const Sample& s) {
    return RunHeader{hex64(c.hash()), c.seed, s.dataset_hash};
}

std::string model_description(const ModelConfig& m) {
    char buf[256];
    if (m.kind == ModelKind::forest)
        std::snprintf(buf, sizeof buf, "random forest, %zu trees, max depth %zu, min leaf %zu, feature share %.3g",
                      m.forest.n_trees, m.forest.tree.max_depth, m.forest.tree.min_leaf,
                      m.forest.tree.feature_subsample);
    else
        std::snprintf(buf, sizeof buf, "gradient boosting, %zu rounds, learning rate %.3g, max depth %zu",
                      m.boost.n_rounds, m.boost.learning_rate, m.boost.tree.max_depth);
    return buf;
}

void write_snapshot_exports(const fs::path& dir, const RunHeader& h, std::span<const QuarterSnapshot> snapshots,
                            const IndustryRoster& roster, bool matrices) {
    for (const auto& s : snapshots) {
        const std::string q = s.graph.quarter().str();
        write_file(dir / ("features_" + q + ".csv"),
                   [&](std::ostream& o) { write_features_csv(o, h, s.features, roster); });
        if (matrices)
            write_file(dir / ("matrix_" + q + ".csv"), [&](std::ostream& o) { write_matrix_csv(o, h, s.graph, roster); });
    }
    write_file(dir / "globals.csv", [&](std::ostream& o) { write_globals_csv(o, h, snapshots); });
    std::set<int> years;
    for (const auto& s : snapshots) years.insert(s.graph.quarter().year);
    for (int y : years) {
        const auto g = year_graph(snapshots, y);
        write_file(dir / ("network_" + std::to_string(y) + ".dot"),
                   [&](std::ostream& o) { write_dot(o, h, g, roster, "payments_" + std::to_string(y)); });
    }
}

// Options shared by the data-reading subcommands.
struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> input;
    std::optional<std::string> roster;
    std::optional<std::size_t> jobs;

    void attach(CLI::App* app, bool data) {
        app->add_option("--config", config, "JSON run configuration");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--out", out, "output directory");
        app->add_option("--jobs", jobs, "worker threads (0 = all cores)");
        if (data) {
            app->add_option("--input", input, "payment records CSV (date,source,dest,value)");
            app->add_option("--roster", roster, "industry roster CSV (code,name,category)");
        }
    }

    RunConfig resolve() const {
        RunConfig c = config.empty() ? RunConfig{} : RunConfig::load(config);
        if (seed) c.seed = *seed;
        if (out) c.output = *out;
        if (input) c.input = *input;
        if (roster) c.roster = *roster;
        if (jobs) c.jobs = *jobs;
        return c;
    }
};

int cmd_synth(const CommonFlags& flags, std::optional<int> sectors, std::ostream& out) {
    RunConfig c = flags.resolve();
    if (sectors) c.synth.sectors = *sectors;
    c.validate();
    const auto data = synth_generate(c.synth, c.seed);
    const fs::path dir = c.output;
    ensure_dir(dir);
    const std::string stamp = "config_hash=" + hex64(c.hash()) + " seed=" + std::to_string(c.seed);
    const std::vector<std::string> comments{stamp};
    write_file(dir / "records.csv", [&](std::ostream& o) { write_records_csv(o, data.records, comments); });
    write_file(dir / "roster.csv", [&](std::ostream& o) {
        o << "# " << stamp << '\n';
        data.roster.write_csv(o);
    });
    out << "wrote " << data.records.size() << " records for " << data.roster.size() << " industries to "
        << dir.string() << '\n';
    return kExitOk;
}

int cmd_features(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    RunConfig c = flags.resolve();
    c.validate();
    if (!c.input) throw ConfigError("features: --input is required");
    const Sample s = load_sample(c, err);
    const fs::path dir = c.output;
    ensure_dir(dir);
    const RunHeader h = header_for(c, s);
    if (!s.roster || s.quarters.empty()) {
        err << "warning: no payment records; writing empty feature tables\n";
        write_file(dir / "globals.csv", [&](std::ostream& o) { write_globals_csv(o, h, {}); });
        return kExitOk;
    }
    const auto snapshots = build_snapshots(s.quarters, s.roster->size(), c.snapshot, c.jobs);
    write_snapshot_exports(dir, h, snapshots, *s.roster, true);
    out << "wrote features for " << snapshots.size() << " quarters to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_report(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    RunConfig c = flags.resolve();
    c.validate();
    const Sample s = load_sample(c, err);
    if (!s.roster || s.quarters.empty()) throw DataError("report: no payment records");
    const fs::path dir = c.output;
    ensure_dir(dir);
    const RunHeader h = header_for(c, s);
    const auto snapshots = build_snapshots(s.quarters, s.roster->size(), c.snapshot, c.jobs);
    const auto ev = evolution_summary(snapshots);
    write_file(dir / "table1_volumes.csv",
               [&](std::ostream& o) { write_table1_csv(o, h, ev, *s.roster, c.top_industries); });
    write_file(dir / "table4_evolution.csv", [&](std::ostream& o) { write_table4_csv(o, h, ev); });
    ReportContext ctx;
    ctx.header = h;
    ctx.roster = &*s.roster;
    ctx.evolution = &ev;
    ctx.clip = c.clip;
    ctx.top_industries = c.top_industries;
    write_file(dir / "report.md", [&](std::ostream& o) { write_markdown_report(o, ctx); });
    out << "wrote evolution report to " << dir.string() << '\n';
    return kExitOk;
}

class StageFailure : public std::runtime_error {
public:
    StageFailure(std::string stage, std::exception_ptr cause, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)), cause_(std::move(cause)) {}
    [[nodiscard]] const std::string& stage() const { return stage_; }
    [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

private:
    std::string stage_;
    std::exception_ptr cause_;
};

template <typename Fn>
auto stage(const std::string& name, std::ostream& err, Fn&& fn) {
    err << "[" << name << "]\n";
    try {
        return fn();
    } catch (const std::exception& e) {
        throw StageFailure(name, std::current_exception(), e.what());
    }
}

int cmd_run(const CommonFlags& flags, bool write_dataset, std::ostream& out, std::ostream& err) {
    RunConfig c = flags.resolve();
    c.validate();
    const fs::path dir = c.output;
    ensure_dir(dir);
    std::error_code ec;
    fs::remove(dir / "FAILED", ec);
    try {
        const Sample s = stage("ingest", err, [&] { return load_sample(c, err); });
        if (!s.roster || s.quarters.empty()) throw StageFailure("ingest", nullptr, "no payment records");
        const IndustryRoster& roster = *s.roster;
        const RunHeader h = header_for(c, s);

        const auto snapshots = stage("features", err, [&] {
            return build_snapshots(s.quarters, roster.size(), c.snapshot, c.jobs);
        });
        const auto bundle = stage("dataset", err, [&] {
            const auto growth = growth_rates(s.quarters, GrowthOptions{c.clip});
            return assemble_all(snapshots, growth, roster, c.dataset);
        });
        if (write_dataset)
            stage("dataset-export", err, [&] {
                for (Specification spec : kSpecifications) {
                    const auto& d = bundle.get(spec);
                    const std::string base = std::string("dataset_") + spec_name(spec);
                    write_file(dir / (base + ".csv"),
                               [&](std::ostream& o) { write_dataset_csv(o, d, roster, h.line()); });
                    write_file(dir / (base + ".schema.json"),
                               [&](std::ostream& o) { write_dataset_schema(o, d, h.config_hash); });
                }
                return 0;
            });
        const auto windows =
            stage("windows", err, [&] { return expanding_windows(s.quarters.size(), c.min_train); });
        auto report = stage("experiment", err, [&] {
            ExperimentOptions opts;
            opts.model = c.model;
            opts.min_test_rows = c.min_test_rows;
            opts.seed = c.seed;
            opts.jobs = c.jobs;
            return run_experiment(bundle, windows, opts);
        });
        stage("diebold-mariano", err, [&] {
            if (c.dm_hac_lag && report.forecasts.size() >= 8) {
                std::vector<double> e1, e2;
                for (const auto& f : report.forecasts) {
                    e1.push_back(f.error(Specification::traditional));
                    e2.push_back(f.error(Specification::combined));
                }
                report.dm = diebold_mariano(e1, e2, c.dm_hac_lag);
            }
            return 0;
        });
        const auto periods = stage("periods", err, [&] { return period_breakdown(report, c.periods); });
        const auto ev = stage("evolution", err, [&] { return evolution_summary(snapshots); });

        stage("report", err, [&] {
            write_file(dir / "table1_volumes.csv",
                       [&](std::ostream& o) { write_table1_csv(o, h, ev, roster, c.top_industries); });
            write_file(dir / "table2_performance.csv", [&](std::ostream& o) { write_table2_csv(o, h, report); });
            write_file(dir / "table3_periods.csv", [&](std::ostream& o) { write_table3_csv(o, h, periods, report); });
            write_file(dir / "table4_evolution.csv", [&](std::ostream& o) { write_table4_csv(o, h, ev); });
            write_file(dir / "forecast_errors.csv",
                       [&](std::ostream& o) { write_forecasts_csv(o, h, report, roster); });
            write_file(dir / "windows.csv", [&](std::ostream& o) { write_windows_csv(o, h, report); });
            ReportContext ctx;
            ctx.header = h;
            ctx.roster = &roster;
            ctx.evolution = &ev;
            ctx.evaluation = &report;
            ctx.periods = periods;
            ctx.assembly = &bundle.stats;
            ctx.clip = c.clip;
            ctx.model_description = model_description(c.model);
            ctx.top_industries = c.top_industries;
            write_file(dir / "report.md", [&](std::ostream& o) { write_markdown_report(o, ctx); });
            return 0;
        });
        out << "combined R2 " << fixed(report.spec(Specification::combined).pooled.r2, 3) << ", traditional R2 "
            << fixed(report.spec(Specification::traditional).pooled.r2, 3) << " ("
            << signed_pp(report.improvement_pp) << "); report written to " << dir.string() << '\n';
        return kExitOk;
    } catch (const StageFailure& f) {
        std::ofstream marker(dir / "FAILED");
        marker << "stage: " << f.stage() << "\nerror: " << f.what() << '\n';
        err << "error: stage '" << f.stage() << "' failed: " << f.what() << '\n';
        try {
            f.rethrow_cause();
        } catch (const ConfigError&) {
            return kExitConfig;
        } catch (const DataError&) {
            return kExitData;
        } catch (...) {
            return f.stage() == "ingest" ? kExitData : kExitInternal;
        }
    }
}

std::vector<double> read_error_column(const std::vector<std::vector<std::string>>& rows, std::size_t col,
                                      const std::string& name) {
    std::vector<double> v;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (col >= rows[r].size()) throw DataError("dm: row " + std::to_string(r + 1) + " is missing '" + name + "'");
        const std::string& s = rows[r][col];
        char* end = nullptr;
        const double x = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) throw DataError("dm: bad number '" + s + "' in '" + name + "'");
        v.push_back(x);
    }
    return v;
}

int cmd_dm(const std::string& path, const std::string& model1, const std::string& model2,
           std::optional<std::size_t> hac_lag, std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw DataError("dm: cannot open '" + path + "'");
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        if (!l.empty() && l.back() == ',') f.emplace_back();
        return f;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (header.empty())
            header = split(line);
        else
            rows.push_back(split(line));
    }
    auto find = [&](const std::string& name) {
        for (const std::string& candidate : {name, "err_" + name})
            for (std::size_t k = 0; k < header.size(); ++k)
                if (header[k] == candidate) return k;
        throw ConfigError("dm: no error column '" + name + "' in " + path);
    };
    const auto e1 = read_error_column(rows, find(model1), model1);
    const auto e2 = read_error_column(rows, find(model2), model2);
    const auto r = diebold_mariano(e1, e2, hac_lag);
    out << "model1: " << model1 << "\nmodel2: " << model2 << "\nn: " << r.count << '\n';
    out << "mean_loss_differential: " << fixed(r.mean_differential, 10) << '\n';
    if (r.status == DmStatus::indistinguishable) {
        out << "result: indistinguishable (zero loss differential)\n";
    } else {
        out << "dm_statistic: " << fixed(r.statistic, 6) << '\n';
        char p[64];
        std::snprintf(p, sizeof p, "%.6g", r.p_value);
        out << "p_value: " << p << '\n';
    }
    out << "variance: " << (hac_lag ? "bartlett hac, lag " + std::to_string(*hac_lag) : "sample") << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inter-industry payment network pipeline", "paynet"};
    app.require_subcommand(1);

    CommonFlags synth_flags, features_flags, run_flags, report_flags;
    std::optional<int> sectors;
    auto* synth = app.add_subcommand("synth", "generate synthetic payment records");
    synth_flags.attach(synth, false);
    synth->add_option("--sectors", sectors, "number of industries");

    auto* features = app.add_subcommand("features", "per-quarter network features, matrices and DOT snapshots");
    features_flags.attach(features, true);

    bool write_dataset = false;
    auto* run = app.add_subcommand("run", "full experiment: features, datasets, models and reports");
    run_flags.attach(run, true);
    run->add_flag("--write-dataset", write_dataset, "also write the three feature tables with schema files");

    std::string errors_path, model1 = "traditional", model2 = "combined";
    std::optional<std::size_t> hac_lag;
    auto* dm = app.add_subcommand("dm", "Diebold-Mariano test on two forecast error columns");
    dm->add_option("--errors", errors_path, "CSV with error columns (e.g. forecast_errors.csv)")->required();
    dm->add_option("--model1", model1, "first error column (name or err_<name>)");
    dm->add_option("--model2", model2, "second error column (name or err_<name>)");
    dm->add_option("--hac-lag", hac_lag, "Bartlett HAC variance with this lag");

    auto* report = app.add_subcommand("report", "volume and network evolution tables");
    report_flags.attach(report, true);

    std::vector<std::string> argv_store{"paynet"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*synth) return cmd_synth(synth_flags, sectors, out);
        if (*features) return cmd_features(features_flags, out, err);
        if (*run) return cmd_run(run_flags, write_dataset, out, err);
        if (*dm) return cmd_dm(errors_path, model1, model2, hac_lag, out);
        if (*report) return cmd_report(report_flags, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace paynet
