#pragma once

#include "paynet/features.hpp"
#include "paynet/graph.hpp"
#include "paynet/ingestion.hpp"
#include "paynet/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paynet {

/// Quarter-on-quarter growth of one bilateral flow.
struct GrowthObservation {
    std::uint32_t source = 0;
    std::uint32_t dest = 0;
    Quarter quarter;
    double growth = 0.0;      // after winsorization
    double raw_growth = 0.0;  // before winsorization
    bool clipped = false;
};

struct GrowthOptions {
    /// Clamp growth to [-clip, clip]; empty disables the clamp.
    std::optional<double> clip = 5.0;
};

/// g = (w_t - w_{t-1}) / w_{t-1} for every pair positive in both quarters.
/// Output is sorted by (quarter, source, dest). Throws DataError when the
/// input quarters are not consecutive.
[[nodiscard]] std::vector<GrowthObservation> growth_rates(std::span<const PairTotals> quarters,
                                                          const GrowthOptions& options = {});

/// Graph and derived features for one quarter of the sample.
struct QuarterSnapshot {
    QuarterlyGraph graph;
    FeatureSet features;
    Matrix two_hop;
};

struct SnapshotOptions {
    FeatureOptions features{};
    bool two_hop_normalized = true;
};

[[nodiscard]] std::vector<QuarterSnapshot> build_snapshots(std::span<const PairTotals> quarters,
                                                           std::size_t node_count,
                                                           const SnapshotOptions& options = {},
                                                           std::size_t jobs = 1);

enum class Specification { traditional, network, combined };
enum class Block { traditional, network };

[[nodiscard]] const char* spec_name(Specification spec);
[[nodiscard]] const char* block_name(Block block);

enum class FixedEffects {
    categorical,  // one source and one dest column holding the industry index
    one_hot,
};

struct DatasetOptions {
    /// Drop rows whose pair has no growth observation two quarters back;
    /// otherwise keep them with lag2 = 0 and a lag2_missing indicator.
    bool drop_missing_lag2 = true;
    FixedEffects fixed_effects = FixedEffects::categorical;
    /// Network columns to keep, by base name (see network_column_names());
    /// empty keeps all.
    std::vector<std::string> network_columns;
};

/// Base names of the network block. Node-level names produce one column per
/// endpoint (src_ / dst_ prefix).
[[nodiscard]] const std::vector<std::string>& network_column_names();

struct RowKey {
    Quarter quarter;  // target quarter
    std::uint32_t source = 0;
    std::uint32_t dest = 0;

    auto operator<=>(const RowKey&) const = default;
};

struct DatasetColumn {
    std::string name;
    Block block = Block::traditional;
    ColumnKind kind = ColumnKind::numeric;

    bool operator==(const DatasetColumn&) const = default;
};

/// Feature table for one specification. Rows are sorted by key, so the rows
/// of any one target quarter form a contiguous block.
struct ForecastDataset {
    Specification spec = Specification::combined;
    Quarter first_quarter;  // quarter index 1 of the sample
    std::vector<DatasetColumn> columns;
    std::vector<ColumnKind> kinds;
    std::vector<RowKey> keys;
    std::vector<double> values;  // row-major, rows() x cols()
    std::vector<double> targets;
    std::uint64_t schema_hash = 0;

    [[nodiscard]] std::size_t rows() const { return keys.size(); }
    [[nodiscard]] std::size_t cols() const { return columns.size(); }
    [[nodiscard]] FeatureMatrix matrix() const;
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * cols(), cols());
    }
    /// 1-based index of a quarter within the sample.
    [[nodiscard]] std::size_t quarter_index(Quarter q) const;
    /// Number of rows whose target quarter index is <= k.
    [[nodiscard]] std::size_t rows_through(std::size_t k) const;
    /// Row range [first, first + count) of target quarter index k.
    [[nodiscard]] std::pair<std::size_t, std::size_t> rows_at(std::size_t k) const;
    [[nodiscard]] std::optional<std::size_t> column_index(std::string_view name) const;

    /// Keeps the columns of the given blocks, in order.
    [[nodiscard]] ForecastDataset select(Specification target) const;
};

[[nodiscard]] std::uint64_t schema_hash(std::span<const DatasetColumn> columns);

struct AssemblyStats {
    std::size_t observations = 0;   // growth observations in the sample
    std::size_t rows = 0;           // rows kept
    std::size_t dropped_no_lag1 = 0;
    std::size_t dropped_no_lag2 = 0;
    std::size_t lag2_missing_kept = 0;
    std::size_t clipped_targets = 0;
};

struct DatasetBundle {
    ForecastDataset traditional;
    ForecastDataset network;
    ForecastDataset combined;
    AssemblyStats stats;

    [[nodiscard]] const ForecastDataset& get(Specification spec) const;
};

/// Joins growth targets with features of the previous quarter's graph. The
/// snapshots must be consecutive quarters; growth observations outside them
/// are ignored. A row at target quarter t uses graph t-1 and growth at t-1
/// and t-2 only, and all three specifications share the same row keys.
[[nodiscard]] DatasetBundle assemble_all(std::span<const QuarterSnapshot> snapshots,
                                         std::span<const GrowthObservation> growth, const IndustryRoster& roster,
                                         const DatasetOptions& options = {});

[[nodiscard]] ForecastDataset assemble(Specification spec, std::span<const QuarterSnapshot> snapshots,
                                       std::span<const GrowthObservation> growth, const IndustryRoster& roster,
                                       const DatasetOptions& options = {});

/// Train on quarter indices 1..train_last, test on quarter index `test`.
struct WindowSplit {
    std::size_t train_last = 0;
    std::size_t test = 0;

    bool operator==(const WindowSplit&) const = default;
};

/// {(1..t -> t+1) : t = min_train .. T-1}. Throws ConfigError unless
/// min_train >= 2 and T > min_train.
[[nodiscard]] std::vector<WindowSplit> expanding_windows(std::size_t quarter_count, std::size_t min_train);

/// CSV with a leading `# ` comment line, then
/// `quarter,source,dest,<columns...>,target`.
void write_dataset_csv(std::ostream& out, const ForecastDataset& data, const IndustryRoster& roster,
                       const std::string& comment);
/// Sidecar schema: column names, block membership, kinds and hashes (JSON).
void write_dataset_schema(std::ostream& out, const ForecastDataset& data, const std::string& config_hash);

}  // namespace paynet
