#include "paynet/report.hpp"

#include "paynet/synth.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace paynet {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string dot_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string r2_text(const std::optional<MetricSet>& m) { return m ? fixed(m->r2, 3) : "NA"; }

std::string industry_label(const IndustryRoster& roster, std::size_t i) {
    const auto& e = roster[i];
    return e.name.empty() ? e.code : e.name + " (" + e.code + ")";
}

std::string period_label(const Period& p) { return p.name + " (" + p.first.str() + "-" + p.last.str() + ")"; }

std::optional<MetricSet> full_sample(const EvaluationReport& report, std::size_t s) {
    if (report.forecasts.size() < 2) return std::nullopt;
    return report.specs[s].pooled;
}

}  // namespace

std::string RunHeader::line() const {
    return "config_hash=" + config_hash + " seed=" + std::to_string(seed) + " dataset_hash=" + dataset_hash;
}

const char* spec_label(Specification spec) {
    switch (spec) {
        case Specification::traditional: return "Traditional Features Only";
        case Specification::network: return "Network Features Only";
        case Specification::combined: break;
    }
    return "Combined (Network + Traditional)";
}

std::string fixed(std::optional<double> v, int digits) {
    if (!v || !std::isfinite(*v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // no "-0.0"
    return s;
}

std::string signed_pp(std::optional<double> v) {
    if (!v) return "NA";
    std::string s = fixed(v, 1);
    if (s[0] != '-' && s != "0.0") s = "+" + s;
    return s + " pp";
}

void write_table1_csv(std::ostream& out, const RunHeader& h, const EvolutionSummary& ev, const IndustryRoster& roster,
                      std::size_t top) {
    out << "# " << h.line() << '\n';
    out << "rank,code,industry,volume_gbp,share_pct\n";
    for (std::size_t k = 0; k < ev.shares.size() && k < top; ++k) {
        const auto& s = ev.shares[k];
        out << k + 1 << ',' << csv_field(roster[s.industry].code) << ',' << csv_field(roster[s.industry].name) << ','
            << num(s.volume) << ',' << num(s.share * 100.0) << '\n';
    }
}

void write_table2_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report) {
    out << "# " << h.line() << '\n';
    out << "feature_set,r2,r2_sd,rmse_pct,mae_pct,n,vs_traditional_pp\n";
    const double base = report.specs[0].pooled.r2.value_or(NAN);
    for (std::size_t s = 0; s < 3; ++s) {
        const auto& sp = report.specs[s];
        out << csv_field(spec_label(sp.spec)) << ',' << fixed(sp.pooled.r2, 6) << ',' << fixed(sp.r2_sd, 6) << ','
            << fixed(sp.pooled.rmse, 6) << ',' << fixed(sp.pooled.mae, 6) << ',' << sp.pooled.count << ',';
        if (s == 0)
            out << "baseline";
        else
            out << fixed(sp.pooled.r2 ? std::optional<double>((*sp.pooled.r2 - base) * 100.0) : std::nullopt, 6);
        out << '\n';
    }
    if (report.dm)
        out << "Diebold-Mariano," << fixed(report.dm->statistic, 6) << ",," << "p=" << num(report.dm->p_value) << ",,"
            << report.dm->count << ",\n";
    else
        out << "Diebold-Mariano,NA,,NA,,0,\n";
}

void write_table3_csv(std::ostream& out, const RunHeader& h, std::span<const PeriodRow> rows,
                      const EvaluationReport& report) {
    out << "# " << h.line() << '\n';
    out << "period,first,last,n,traditional_r2,network_r2,combined_r2,improvement_pp\n";
    for (const auto& r : rows)
        out << csv_field(r.period.name) << ',' << r.period.first.str() << ',' << r.period.last.str() << ',' << r.count
            << ',' << r2_text(r.metrics[0]) << ',' << r2_text(r.metrics[1]) << ',' << r2_text(r.metrics[2]) << ','
            << fixed(r.improvement_pp, 6) << '\n';
    out << "Full Sample,,," << report.forecasts.size() << ',' << r2_text(full_sample(report, 0)) << ','
        << r2_text(full_sample(report, 1)) << ',' << r2_text(full_sample(report, 2)) << ','
        << fixed(report.improvement_pp, 6) << '\n';
}

void write_table4_csv(std::ostream& out, const RunHeader& h, const EvolutionSummary& ev) {
    out << "# " << h.line() << '\n';
    out << "year,quarters,density,edges,avg_path_length,clustering\n";
    for (const auto& y : ev.years)
        out << y.year << ',' << y.quarters << ',' << num(y.density) << ',' << num(y.edge_count) << ','
            << (y.avg_path_length ? num(*y.avg_path_length) : "NA") << ',' << num(y.mean_clustering) << '\n';
    if (ev.change) {
        const auto& c = *ev.change;
        auto pct = [](const std::optional<double>& v) { return v ? num(*v) : std::string("NA"); };
        out << "change_" << c.first_year << '_' << c.last_year << ",," << pct(c.density_pct) << ','
            << pct(c.edge_count_pct) << ',' << pct(c.avg_path_length_pct) << ',' << pct(c.mean_clustering_pct)
            << '\n';
    }
}

void write_forecasts_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report,
                         const IndustryRoster& roster) {
    out << "# " << h.line() << '\n';
    out << "quarter,source,dest,target,pred_traditional,pred_network,pred_combined,err_traditional,err_network,"
           "err_combined\n";
    for (const auto& f : report.forecasts) {
        out << f.key.quarter.str() << ',' << csv_field(roster[f.key.source].code) << ','
            << csv_field(roster[f.key.dest].code) << ',' << num(f.target);
        for (double p : f.prediction) out << ',' << num(p);
        for (Specification s : kSpecifications) out << ',' << num(f.error(s));
        out << '\n';
    }
}

void write_windows_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report) {
    out << "# " << h.line() << '\n';
    out << "window,train_through,test_quarter,train_rows,test_rows,excluded,traditional_r2,network_r2,combined_r2\n";
    for (std::size_t w = 0; w < report.windows.size(); ++w) {
        const auto& r = report.windows[w];
        out << w + 1 << ',' << r.split.train_last << ',' << r.test_quarter.str() << ',' << r.train_rows << ','
            << r.test_rows << ',' << (r.excluded ? 1 : 0);
        for (const auto& m : r.metrics) out << ',' << (m ? fixed(m->r2, 6) : "NA");
        out << '\n';
    }
}

void write_markdown_report(std::ostream& out, const ReportContext& ctx) {
    const auto& roster = *ctx.roster;
    const auto& ev = *ctx.evolution;
    out << "# Inter-industry payment network report\n\n";
    out << "<!-- " << ctx.header.line() << " -->\n\n";
    out << "| Setting | Value |\n|---|---|\n";
    out << "| Config hash | `" << ctx.header.config_hash << "` |\n";
    out << "| Seed | " << ctx.header.seed << " |\n";
    out << "| Dataset hash | `" << ctx.header.dataset_hash << "` |\n";
    out << "| Industries | " << roster.size() << " |\n";
    if (!ev.years.empty())
        out << "| Years | " << ev.years.front().year << "-" << ev.years.back().year << " |\n";
    out << "| Growth winsorization | " << (ctx.clip ? "+/-" + fixed(*ctx.clip * 100.0, 0) + "%" : "off") << " |\n";
    if (!ctx.model_description.empty()) out << "| Model | " << ctx.model_description << " |\n";
    out << '\n';

    out << "## Top industries by inter-industry payment volume\n\n";
    out << "Volume is (inflow + outflow) / 2 summed over all quarters.\n\n";
    out << "| Rank | Industry | Volume (GBP bn) | Share (%) |\n|---:|---|---:|---:|\n";
    double top_volume = 0.0, top_share = 0.0;
    for (std::size_t k = 0; k < ev.shares.size() && k < ctx.top_industries; ++k) {
        const auto& s = ev.shares[k];
        top_volume += s.volume;
        top_share += s.share;
        out << "| " << k + 1 << " | " << industry_label(roster, s.industry) << " | " << fixed(s.volume / 1e9, 2)
            << " | " << fixed(s.share * 100.0, 1) << " |\n";
    }
    out << "| | **Top " << std::min(ctx.top_industries, ev.shares.size()) << " Total** | **"
        << fixed(top_volume / 1e9, 2) << "** | **" << fixed(top_share * 100.0, 1) << "** |\n\n";

    if (ctx.evaluation) {
        const auto& rep = *ctx.evaluation;
        out << "## Forecasting performance\n\n";
        out << "Pooled one-step-ahead forecasts over expanding windows. The +/- band is the standard deviation of "
               "R2 across windows.\n\n";
        out << "| Feature Set | R2 | RMSE (%) | MAE (%) | vs. Traditional |\n|---|---:|---:|---:|---:|\n";
        const auto base = rep.specs[0].pooled.r2;
        for (std::size_t s = 0; s < 3; ++s) {
            const auto& sp = rep.specs[s];
            out << "| " << spec_label(sp.spec) << " | " << fixed(sp.pooled.r2, 3) << " +/- " << fixed(sp.r2_sd, 3)
                << " | " << fixed(sp.pooled.rmse, 2) << " | " << fixed(sp.pooled.mae, 2) << " | ";
            if (s == 0)
                out << "Baseline";
            else
                out << signed_pp(base && sp.pooled.r2 ? std::optional<double>((*sp.pooled.r2 - *base) * 100.0)
                                                      : std::nullopt);
            out << " |\n";
        }
        if (rep.dm) {
            if (rep.dm->status == DmStatus::indistinguishable)
                out << "| Diebold-Mariano Test | forecasts indistinguishable | | | |\n";
            else
                out << "| Diebold-Mariano Test | DM = " << fixed(rep.dm->statistic, 2) << " | "
                    << (rep.dm->p_value < 1e-4 ? std::string("p < 0.0001") : "p = " + fixed(rep.dm->p_value, 4)) << " | | |\n";
        } else {
            out << "| Diebold-Mariano Test | NA | | | |\n";
        }
        std::size_t used = 0, excluded = 0;
        for (const auto& w : rep.windows) (w.excluded ? excluded : used) += 1;
        out << "\nWindows evaluated: " << used << "; excluded for too few test rows: " << excluded
            << ". Test observations: " << rep.forecasts.size() << ".";
        if (ctx.assembly)
            out << " Dataset rows: " << ctx.assembly->rows << " of " << ctx.assembly->observations
                << " growth observations (dropped without lag 1: " << ctx.assembly->dropped_no_lag1
                << ", without lag 2: " << ctx.assembly->dropped_no_lag2
                << "; winsorized targets: " << ctx.assembly->clipped_targets << ").";
        out << "\n\n";

        out << "## Network contribution by period\n\n";
        out << "| Period | Traditional R2 | Enhanced R2 | Improvement | n |\n|---|---:|---:|---:|---:|\n";
        for (const auto& r : ctx.periods)
            out << "| " << period_label(r.period) << " | " << r2_text(r.metrics[0]) << " | " << r2_text(r.metrics[2])
                << " | " << signed_pp(r.improvement_pp) << " | " << r.count << " |\n";
        out << "| **Full Sample** | **" << r2_text(full_sample(rep, 0)) << "** | **" << r2_text(full_sample(rep, 2))
            << "** | **" << signed_pp(rep.improvement_pp) << "** | " << rep.forecasts.size() << " |\n\n";
    }

    out << "## Network structure by year\n\n";
    out << "Yearly values are means of the quarterly graph metrics.\n\n";
    out << "| Year | Density | Edges | Avg Path Length | Clustering |\n|---|---:|---:|---:|---:|\n";
    for (const auto& y : ev.years)
        out << "| " << y.year << " | " << fixed(y.density, 3) << " | " << fixed(y.edge_count, 0) << " | "
            << fixed(y.avg_path_length, 2) << " | " << fixed(y.mean_clustering, 2) << " |\n";
    if (ev.change) {
        auto pct = [](const std::optional<double>& v) {
            if (!v) return std::string("NA");
            std::string s = fixed(v, 1);
            return (s[0] != '-' && s != "0.0" ? "+" : "") + s + "%";
        };
        const auto& c = *ev.change;
        out << "| *Change " << c.first_year << "-" << c.last_year << "* | " << pct(c.density_pct) << " | "
            << pct(c.edge_count_pct) << " | " << pct(c.avg_path_length_pct) << " | " << pct(c.mean_clustering_pct)
            << " |\n";
    }
}

void write_features_csv(std::ostream& out, const RunHeader& h, const FeatureSet& fs, const IndustryRoster& roster) {
    out << "# " << h.line() << " quarter=" << fs.quarter.str() << '\n';
    out << "code,in_degree,out_degree,in_strength,out_strength,betweenness,betweenness_normalized,eigenvector,"
           "clustering\n";
    const auto& n = fs.nodes;
    for (std::size_t i = 0; i < n.size(); ++i)
        out << csv_field(roster[i].code) << ',' << n.in_degree[i] << ',' << n.out_degree[i] << ','
            << num(n.in_strength[i]) << ',' << num(n.out_strength[i]) << ',' << num(n.betweenness[i]) << ','
            << num(n.betweenness_normalized[i]) << ',' << num(n.eigenvector[i]) << ',' << num(n.clustering[i])
            << '\n';
}

void write_globals_csv(std::ostream& out, const RunHeader& h, std::span<const QuarterSnapshot> snapshots) {
    out << "# " << h.line() << '\n';
    out << "quarter,nodes,edges,density,avg_path_length,reachable_fraction,mean_clustering,eigenvector_converged\n";
    for (const auto& s : snapshots) {
        const auto& g = s.features.global;
        out << s.graph.quarter().str() << ',' << s.graph.node_count() << ',' << g.edge_count << ',' << num(g.density)
            << ',' << (g.avg_path_length ? num(*g.avg_path_length) : "NA") << ',' << num(g.reachable_fraction) << ','
            << num(g.mean_clustering) << ',' << (s.features.nodes.eigenvector_converged ? 1 : 0) << '\n';
    }
}

void write_matrix_csv(std::ostream& out, const RunHeader& h, const QuarterlyGraph& graph,
                      const IndustryRoster& roster) {
    out << "# " << h.line() << " quarter=" << graph.quarter().str() << '\n';
    out << "source";
    for (std::size_t j = 0; j < roster.size(); ++j) out << ',' << csv_field(roster[j].code);
    out << '\n';
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        out << csv_field(roster[i].code);
        for (double v : graph.adj().row(i)) out << ',' << num(v);
        out << '\n';
    }
}

std::string category_colour(const std::string& category) {
    static const char* colours[] = {"red", "blue", "green", "orange", "purple", "grey"};
    const auto& cats = sector_categories();
    for (std::size_t k = 0; k < cats.size(); ++k)
        if (cats[k] == category) return colours[k];
    return "black";
}

void write_dot(std::ostream& out, const RunHeader& h, const QuarterlyGraph& graph, const IndustryRoster& roster,
               const std::string& title) {
    out << "// " << h.line() << '\n';
    out << "digraph " << dot_string(title) << " {\n";
    out << "  label=" << dot_string(title) << ";\n";
    out << "  node [style=filled, fontcolor=white];\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto& e = roster[i];
        out << "  " << dot_string(e.code) << " [label=" << dot_string(e.code)
            << ", category=" << dot_string(e.category) << ", fillcolor=" << category_colour(e.category) << "];\n";
    }
    for (std::size_t i = 0; i < graph.node_count(); ++i)
        for (std::size_t j = 0; j < graph.node_count(); ++j)
            if (graph.has_edge(i, j))
                out << "  " << dot_string(roster[i].code) << " -> " << dot_string(roster[j].code)
                    << " [weight=" << num(graph.adj()(i, j)) << "];\n";
    out << "}\n";
}

QuarterlyGraph year_graph(std::span<const QuarterSnapshot> snapshots, int year) {
    std::size_t n = snapshots.empty() ? 0 : snapshots.front().graph.node_count();
    Matrix sum(n);
    for (const auto& s : snapshots) {
        if (s.graph.quarter().year != year) continue;
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = sum.row(i);
            const auto src = s.graph.adj().row(i);
            for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
        }
    }
    return QuarterlyGraph(Quarter{year, 4}, std::move(sum));
}

}  // namespace paynet
