#pragma once

#include "paynet/dataset.hpp"
#include "paynet/model.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paynet {

inline constexpr std::array<Specification, 3> kSpecifications{Specification::traditional, Specification::network,
                                                             Specification::combined};

struct ModelConfig {
    ModelKind kind = ModelKind::forest;
    ForestParams forest{};
    BoostParams boost{};
};

struct ExperimentOptions {
    ModelConfig model{};
    std::size_t min_test_rows = 30;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct WindowResult {
    WindowSplit split;
    Quarter test_quarter;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    bool excluded = false;  // too few test rows; left out of pooled statistics
    std::array<std::optional<MetricSet>, 3> metrics;  // by kSpecifications order
};

/// One pooled test observation with the three paired forecasts.
struct ForecastRecord {
    RowKey key;
    double target = 0.0;
    std::array<double, 3> prediction{};  // by kSpecifications order

    [[nodiscard]] double error(Specification spec) const;
};

struct SpecSummary {
    Specification spec = Specification::traditional;
    MetricSet pooled;
    std::optional<double> r2_sd;  // standard deviation of per-window R^2
    std::size_t windows = 0;
};

enum class DmStatus { ok, indistinguishable };

struct DmResult {
    DmStatus status = DmStatus::ok;
    double statistic = 0.0;
    double p_value = 1.0;
    double mean_differential = 0.0;
    double variance_of_mean = 0.0;
    std::size_t count = 0;
    std::optional<std::size_t> hac_lag;
};

struct EvaluationReport {
    std::vector<WindowResult> windows;
    std::vector<ForecastRecord> forecasts;  // sorted by key
    std::array<SpecSummary, 3> specs;
    /// Combined minus traditional pooled R^2, in percentage points.
    std::optional<double> improvement_pp;
    /// Traditional (model 1) against combined (model 2) on squared errors.
    std::optional<DmResult> dm;

    [[nodiscard]] const SpecSummary& spec(Specification s) const;
};

/// Fits every specification on each window's training quarters and predicts
/// its test quarter. Windows with fewer than min_test_rows test rows are
/// flagged and excluded from pooled statistics.
[[nodiscard]] EvaluationReport run_experiment(const DatasetBundle& bundle, std::span<const WindowSplit> windows,
                                              const ExperimentOptions& options);

/// Loss differential d_t = e1_t^2 - e2_t^2 of paired forecast errors.
[[nodiscard]] std::vector<double> loss_differential(std::span<const double> errors1, std::span<const double> errors2);

/// DM = mean(d) / sqrt(Var(mean(d))) with Var(mean(d)) = sample variance / T,
/// or a Bartlett-weighted long-run variance / T when hac_lag is given.
/// Two-sided p-value from the standard normal. Needs at least two values.
/// Zero variance with zero mean gives DmStatus::indistinguishable; zero
/// variance with nonzero mean throws DataError.
[[nodiscard]] DmResult diebold_mariano_differential(std::span<const double> d,
                                                    std::optional<std::size_t> hac_lag = std::nullopt);

/// Paired-error form; requires equal lengths of at least 8 and finite values.
[[nodiscard]] DmResult diebold_mariano(std::span<const double> errors1, std::span<const double> errors2,
                                       std::optional<std::size_t> hac_lag = std::nullopt);

struct Period {
    std::string name;
    Quarter first;
    Quarter last;
};

/// 2017Q1-2019Q4, 2020Q1-2021Q4, 2022Q1-2024Q4.
[[nodiscard]] std::vector<Period> default_periods();

struct PeriodRow {
    Period period;
    std::size_t count = 0;
    std::array<std::optional<MetricSet>, 3> metrics;  // empty when count < 2
    std::optional<double> improvement_pp;
};

/// Recomputes pooled metrics on each period's test observations. Throws
/// ConfigError if periods overlap or a test quarter falls in no period.
[[nodiscard]] std::vector<PeriodRow> period_breakdown(const EvaluationReport& report, std::span<const Period> periods);

struct YearStats {
    int year = 0;
    std::size_t quarters = 0;
    double density = 0.0;
    double edge_count = 0.0;
    std::optional<double> avg_path_length;  // mean over quarters where defined
    double mean_clustering = 0.0;
};

struct VolumeShare {
    std::size_t industry = 0;
    double volume = 0.0;  // (inflow + outflow) / 2, GBP
    double share = 0.0;   // volume / grand total
};

struct ChangeRow {
    int first_year = 0;
    int last_year = 0;
    std::optional<double> density_pct;
    std::optional<double> edge_count_pct;
    std::optional<double> avg_path_length_pct;
    std::optional<double> mean_clustering_pct;
};

struct EvolutionSummary {
    std::vector<YearStats> years;
    std::optional<ChangeRow> change;  // needs at least two years
    std::vector<VolumeShare> shares;  // descending volume, ties by index
    double grand_total = 0.0;
};

/// (last - first) / first * 100; empty when first is zero.
[[nodiscard]] std::optional<double> percent_change(double first, double last);

/// Yearly values are means of the quarterly metrics of that year.
[[nodiscard]] EvolutionSummary evolution_summary(std::span<const QuarterSnapshot> snapshots);
[[nodiscard]] EvolutionSummary evolution_summary(std::span<const QuarterlyGraph> graphs);

}  // namespace paynet
