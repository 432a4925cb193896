#pragma once

#include "paynet/dataset.hpp"
#include "paynet/evaluate.hpp"
#include "paynet/features.hpp"
#include "paynet/ingestion.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace paynet {

/// Provenance stamped on every output file.
struct RunHeader {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string dataset_hash;

    /// "config_hash=... seed=... dataset_hash=..."
    [[nodiscard]] std::string line() const;
};

/// Table 2 row labels, by kSpecifications order.
[[nodiscard]] const char* spec_label(Specification spec);

/// Fixed-precision decimal; "NA" for an empty value.
[[nodiscard]] std::string fixed(std::optional<double> v, int digits);
/// "+8.8 pp" style signed value.
[[nodiscard]] std::string signed_pp(std::optional<double> v);

void write_table1_csv(std::ostream& out, const RunHeader& h, const EvolutionSummary& ev, const IndustryRoster& roster,
                      std::size_t top);
void write_table2_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report);
void write_table3_csv(std::ostream& out, const RunHeader& h, std::span<const PeriodRow> rows,
                      const EvaluationReport& report);
void write_table4_csv(std::ostream& out, const RunHeader& h, const EvolutionSummary& ev);
void write_forecasts_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report,
                         const IndustryRoster& roster);
void write_windows_csv(std::ostream& out, const RunHeader& h, const EvaluationReport& report);

struct ReportContext {
    RunHeader header;
    const IndustryRoster* roster = nullptr;
    const EvolutionSummary* evolution = nullptr;
    const EvaluationReport* evaluation = nullptr;  // optional
    std::span<const PeriodRow> periods;
    const AssemblyStats* assembly = nullptr;  // optional
    std::optional<double> clip;
    std::string model_description;
    std::size_t top_industries = 10;
};

/// Markdown report with the volume, performance, period and evolution tables.
void write_markdown_report(std::ostream& out, const ReportContext& ctx);

/// Per-node centralities for one quarter.
void write_features_csv(std::ostream& out, const RunHeader& h, const FeatureSet& fs, const IndustryRoster& roster);
/// One row per quarter of global metrics.
void write_globals_csv(std::ostream& out, const RunHeader& h, std::span<const QuarterSnapshot> snapshots);
/// Dense adjacency in GBP with roster codes as row/column labels.
void write_matrix_csv(std::ostream& out, const RunHeader& h, const QuarterlyGraph& graph, const IndustryRoster& roster);

/// Graphviz digraph: one node per roster entry coloured by category, one
/// edge per positive off-diagonal weight.
void write_dot(std::ostream& out, const RunHeader& h, const QuarterlyGraph& graph, const IndustryRoster& roster,
               const std::string& title);

/// Colour used for a roster category in DOT output.
[[nodiscard]] std::string category_colour(const std::string& category);

/// Sum of the quarterly graphs of one calendar year.
[[nodiscard]] QuarterlyGraph year_graph(std::span<const QuarterSnapshot> snapshots, int year);

}  // namespace paynet
