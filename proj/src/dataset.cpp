#include "paynet/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace paynet {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string>& node_column_names() {
    static const std::vector<std::string> names{
        "in_degree", "out_degree", "log_in_strength", "log_out_strength", "betweenness", "eigenvector", "clustering",
    };
    return names;
}

const std::vector<std::string>& pair_column_names() {
    static const std::vector<std::string> names{"two_hop", "density", "avg_path_length"};
    return names;
}

double node_value(const NodeFeatures& f, const std::string& name, std::size_t i) {
    if (name == "in_degree") return f.in_degree[i];
    if (name == "out_degree") return f.out_degree[i];
    if (name == "log_in_strength") return std::log1p(f.in_strength[i]);
    if (name == "log_out_strength") return std::log1p(f.out_strength[i]);
    if (name == "betweenness") return f.betweenness_normalized[i];
    if (name == "eigenvector") return f.eigenvector[i];
    return f.clustering[i];
}

bool keeps(const DatasetOptions& options, const std::string& name) {
    return options.network_columns.empty() ||
           std::find(options.network_columns.begin(), options.network_columns.end(), name) !=
               options.network_columns.end();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<GrowthObservation> growth_rates(std::span<const PairTotals> quarters, const GrowthOptions& options) {
    if (options.clip && !(*options.clip > 0.0)) throw ConfigError("growth: clip must be > 0");
    for (std::size_t t = 1; t < quarters.size(); ++t)
        if (quarters[t].quarter != quarters[t - 1].quarter.next())
            throw DataError("growth: quarters not contiguous at " + quarters[t - 1].quarter.str() + " -> " +
                            quarters[t].quarter.str());

    std::vector<GrowthObservation> out;
    for (std::size_t t = 1; t < quarters.size(); ++t) {
        const auto& before = quarters[t - 1].totals;
        for (const auto& [key, now] : quarters[t].totals) {
            const auto it = before.find(key);
            if (it == before.end() || it->second <= 0 || now <= 0) continue;
            GrowthObservation g;
            g.source = key.first;
            g.dest = key.second;
            g.quarter = quarters[t].quarter;
            g.raw_growth = static_cast<double>(now - it->second) / static_cast<double>(it->second);
            g.growth = g.raw_growth;
            if (options.clip) {
                g.growth = std::clamp(g.raw_growth, -*options.clip, *options.clip);
                g.clipped = g.growth != g.raw_growth;
            }
            out.push_back(g);
        }
    }
    return out;  // map iteration already yields (quarter, source, dest) order
}

std::vector<QuarterSnapshot> build_snapshots(std::span<const PairTotals> quarters, std::size_t node_count,
                                             const SnapshotOptions& options, std::size_t jobs) {
    std::vector<std::optional<QuarterSnapshot>> slots(quarters.size());
    parallel_for(quarters.size(), jobs, [&](std::size_t t) {
        auto graph = build_graph(quarters[t], node_count);
        auto features = extract_features(graph, options.features);
        auto hop = two_hop(graph, options.two_hop_normalized);
        slots[t].emplace(QuarterSnapshot{std::move(graph), std::move(features), std::move(hop)});
    });
    std::vector<QuarterSnapshot> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

const char* spec_name(Specification spec) {
    switch (spec) {
        case Specification::traditional: return "traditional";
        case Specification::network: return "network";
        case Specification::combined: return "combined";
    }
    return "?";
}

const char* block_name(Block block) { return block == Block::traditional ? "traditional" : "network"; }

const std::vector<std::string>& network_column_names() {
    static const std::vector<std::string> names = [] {
        auto all = node_column_names();
        for (const auto& n : pair_column_names()) all.push_back(n);
        return all;
    }();
    return names;
}

FeatureMatrix ForecastDataset::matrix() const {
    return FeatureMatrix{values, rows(), cols(), kinds, schema_hash};
}

std::size_t ForecastDataset::quarter_index(Quarter q) const {
    return static_cast<std::size_t>(quarters_between(first_quarter, q) + 1);
}

std::size_t ForecastDataset::rows_through(std::size_t k) const {
    const auto it = std::partition_point(keys.begin(), keys.end(),
                                         [&](const RowKey& key) { return quarter_index(key.quarter) <= k; });
    return static_cast<std::size_t>(it - keys.begin());
}

std::pair<std::size_t, std::size_t> ForecastDataset::rows_at(std::size_t k) const {
    const std::size_t first = k == 0 ? 0 : rows_through(k - 1);
    return {first, rows_through(k) - first};
}

std::optional<std::size_t> ForecastDataset::column_index(std::string_view name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].name == name) return c;
    return std::nullopt;
}

std::uint64_t schema_hash(std::span<const DatasetColumn> columns) {
    Fnv1a h;
    h.update_u64(columns.size());
    for (const auto& c : columns) {
        h.update(c.name);
        h.update_u64(static_cast<std::uint64_t>(c.block));
        h.update_u64(static_cast<std::uint64_t>(c.kind));
    }
    return h.digest();
}

ForecastDataset ForecastDataset::select(Specification target) const {
    std::vector<std::size_t> picked;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const Block b = columns[c].block;
        if (target == Specification::combined || (target == Specification::traditional && b == Block::traditional) ||
            (target == Specification::network && b == Block::network))
            picked.push_back(c);
    }
    ForecastDataset out;
    out.spec = target;
    out.first_quarter = first_quarter;
    out.keys = keys;
    out.targets = targets;
    for (std::size_t c : picked) {
        out.columns.push_back(columns[c]);
        out.kinds.push_back(kinds[c]);
    }
    out.values.reserve(rows() * picked.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        const auto src = row(r);
        for (std::size_t c : picked) out.values.push_back(src[c]);
    }
    out.schema_hash = paynet::schema_hash(out.columns);
    return out;
}

const ForecastDataset& DatasetBundle::get(Specification spec) const {
    switch (spec) {
        case Specification::traditional: return traditional;
        case Specification::network: return network;
        case Specification::combined: break;
    }
    return combined;
}

DatasetBundle assemble_all(std::span<const QuarterSnapshot> snapshots, std::span<const GrowthObservation> growth,
                           const IndustryRoster& roster, const DatasetOptions& options) {
    for (const auto& name : options.network_columns)
        if (std::find(network_column_names().begin(), network_column_names().end(), name) ==
            network_column_names().end())
            throw ConfigError("dataset: unknown network column '" + name + "'");
    if (snapshots.empty()) throw DataError("dataset: no quarters");
    for (std::size_t t = 1; t < snapshots.size(); ++t)
        if (snapshots[t].graph.quarter() != snapshots[t - 1].graph.quarter().next())
            throw DataError("dataset: snapshots not contiguous");
    const std::size_t n = roster.size();
    for (const auto& s : snapshots)
        if (s.graph.node_count() != n) throw DataError("dataset: snapshot size differs from roster");

    const Quarter first = snapshots.front().graph.quarter();
    const std::size_t quarters = snapshots.size();

    // growth lookup by (quarter offset, pair)
    std::vector<double> table(quarters * n * n, kMissing);
    std::vector<const GrowthObservation*> in_sample;
    for (const auto& g : growth) {
        const int t = quarters_between(first, g.quarter);
        if (t < 0 || t >= static_cast<int>(quarters)) continue;
        if (g.source >= n || g.dest >= n) throw DataError("dataset: growth index out of range");
        table[(static_cast<std::size_t>(t) * n + g.source) * n + g.dest] = g.growth;
        in_sample.push_back(&g);
    }
    std::sort(in_sample.begin(), in_sample.end(), [](const GrowthObservation* a, const GrowthObservation* b) {
        return RowKey{a->quarter, a->source, a->dest} < RowKey{b->quarter, b->source, b->dest};
    });
    auto lookup = [&](std::size_t t, std::size_t i, std::size_t j) { return table[(t * n + i) * n + j]; };

    ForecastDataset full;
    full.spec = Specification::combined;
    full.first_quarter = first;
    auto add = [&](std::string name, Block block, ColumnKind kind) {
        full.columns.push_back({std::move(name), block, kind});
        full.kinds.push_back(kind);
    };
    add("lag1_growth", Block::traditional, ColumnKind::numeric);
    add("lag2_growth", Block::traditional, ColumnKind::numeric);
    if (!options.drop_missing_lag2) add("lag2_missing", Block::traditional, ColumnKind::numeric);
    for (int q = 1; q <= 4; ++q) add("q" + std::to_string(q), Block::traditional, ColumnKind::numeric);
    if (options.fixed_effects == FixedEffects::categorical) {
        add("source", Block::traditional, ColumnKind::categorical);
        add("dest", Block::traditional, ColumnKind::categorical);
    } else {
        for (std::size_t i = 0; i < n; ++i) add("src_is_" + roster[i].code, Block::traditional, ColumnKind::numeric);
        for (std::size_t i = 0; i < n; ++i) add("dst_is_" + roster[i].code, Block::traditional, ColumnKind::numeric);
    }
    std::vector<std::string> node_cols;
    for (const auto& name : node_column_names())
        if (keeps(options, name)) node_cols.push_back(name);
    for (const auto& name : node_cols) add("src_" + name, Block::network, ColumnKind::numeric);
    for (const auto& name : node_cols) add("dst_" + name, Block::network, ColumnKind::numeric);
    std::vector<std::string> pair_cols;
    for (const auto& name : pair_column_names())
        if (keeps(options, name)) pair_cols.push_back(name);
    for (const auto& name : pair_cols) add(name, Block::network, ColumnKind::numeric);

    AssemblyStats stats;
    stats.observations = in_sample.size();
    for (const GrowthObservation* g : in_sample) {
        const auto t = static_cast<std::size_t>(quarters_between(first, g->quarter));
        const double lag1 = t >= 1 ? lookup(t - 1, g->source, g->dest) : kMissing;
        if (std::isnan(lag1)) {
            ++stats.dropped_no_lag1;
            continue;
        }
        double lag2 = t >= 2 ? lookup(t - 2, g->source, g->dest) : kMissing;
        const bool lag2_missing = std::isnan(lag2);
        if (lag2_missing) {
            if (options.drop_missing_lag2) {
                ++stats.dropped_no_lag2;
                continue;
            }
            ++stats.lag2_missing_kept;
            lag2 = 0.0;
        }
        if (g->clipped) ++stats.clipped_targets;

        auto& v = full.values;
        v.push_back(lag1);
        v.push_back(lag2);
        if (!options.drop_missing_lag2) v.push_back(lag2_missing ? 1.0 : 0.0);
        for (int q = 1; q <= 4; ++q) v.push_back(g->quarter.q == q ? 1.0 : 0.0);
        if (options.fixed_effects == FixedEffects::categorical) {
            v.push_back(g->source);
            v.push_back(g->dest);
        } else {
            for (std::size_t i = 0; i < n; ++i) v.push_back(i == g->source ? 1.0 : 0.0);
            for (std::size_t i = 0; i < n; ++i) v.push_back(i == g->dest ? 1.0 : 0.0);
        }
        const QuarterSnapshot& prev = snapshots[t - 1];
        for (const auto& name : node_cols) v.push_back(node_value(prev.features.nodes, name, g->source));
        for (const auto& name : node_cols) v.push_back(node_value(prev.features.nodes, name, g->dest));
        for (const auto& name : pair_cols) {
            if (name == "two_hop")
                v.push_back(prev.two_hop(g->source, g->dest));
            else if (name == "density")
                v.push_back(prev.features.global.density);
            else
                v.push_back(prev.features.global.avg_path_length.value_or(-1.0));
        }
        full.keys.push_back({g->quarter, g->source, g->dest});
        full.targets.push_back(g->growth);
    }
    stats.rows = full.keys.size();
    full.schema_hash = schema_hash(full.columns);

    DatasetBundle bundle;
    bundle.traditional = full.select(Specification::traditional);
    bundle.network = full.select(Specification::network);
    bundle.combined = std::move(full);
    bundle.stats = stats;
    return bundle;
}

ForecastDataset assemble(Specification spec, std::span<const QuarterSnapshot> snapshots,
                         std::span<const GrowthObservation> growth, const IndustryRoster& roster,
                         const DatasetOptions& options) {
    auto bundle = assemble_all(snapshots, growth, roster, options);
    switch (spec) {
        case Specification::traditional: return std::move(bundle.traditional);
        case Specification::network: return std::move(bundle.network);
        case Specification::combined: break;
    }
    return std::move(bundle.combined);
}

std::vector<WindowSplit> expanding_windows(std::size_t quarter_count, std::size_t min_train) {
    if (min_train < 2) throw ConfigError("windows: min_train must be >= 2");
    if (quarter_count <= min_train)
        throw ConfigError("windows: need more than " + std::to_string(min_train) + " quarters, got " +
                          std::to_string(quarter_count));
    std::vector<WindowSplit> out;
    for (std::size_t t = min_train; t < quarter_count; ++t) out.push_back({t, t + 1});
    return out;
}

void write_dataset_csv(std::ostream& out, const ForecastDataset& data, const IndustryRoster& roster,
                       const std::string& comment) {
    out << "# " << comment << '\n';
    out << "quarter,source,dest";
    for (const auto& c : data.columns) out << ',' << c.name;
    out << ",target\n";
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto& k = data.keys[r];
        out << k.quarter.str() << ',' << roster[k.source].code << ',' << roster[k.dest].code;
        for (double v : data.row(r)) out << ',' << format_double(v);
        out << ',' << format_double(data.targets[r]) << '\n';
    }
}

void write_dataset_schema(std::ostream& out, const ForecastDataset& data, const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["specification"] = spec_name(data.spec);
    j["config_hash"] = config_hash;
    j["schema_hash"] = hex64(data.schema_hash);
    j["rows"] = data.rows();
    j["key"] = {"quarter", "source", "dest"};
    j["target"] = "target";
    auto& cols = j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : data.columns)
        cols.push_back({{"name", c.name},
                        {"block", block_name(c.block)},
                        {"kind", c.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
    out << j.dump(2) << '\n';
}

}  // namespace paynet
