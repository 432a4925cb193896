#pragma once

#include "paynet/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace paynet {

enum class ColumnKind : std::uint8_t {
    numeric,
    categorical,  // non-negative integer codes, split by target-mean grouping
};

/// Non-owning row-major view over a feature table.
struct FeatureMatrix {
    std::span<const double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::span<const ColumnKind> kinds;
    std::uint64_t schema_hash = 0;

    [[nodiscard]] std::span<const double> row(std::size_t i) const { return values.subspan(i * cols, cols); }
    /// Rows [first, first + count).
    [[nodiscard]] FeatureMatrix slice(std::size_t first, std::size_t count) const;
};

/// Either a split or a leaf (feature < 0). Numeric splits send x <= threshold
/// left; categorical splits send listed categories left.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::vector<std::uint32_t> categories;  // sorted
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    [[nodiscard]] bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] const std::vector<TreeNode>& nodes() const { return nodes_; }
    [[nodiscard]] std::size_t depth() const;
    [[nodiscard]] std::size_t leaf_count() const;

    bool operator==(const RegressionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeParams {
    std::size_t max_depth = 8;  // 0 = unbounded
    std::size_t min_leaf = 20;
    double feature_subsample = 1.0 / 3.0;  // share of columns tried at each split
    std::size_t max_bins = 255;
};

struct ForestParams {
    std::size_t n_trees = 200;
    bool bootstrap = true;
    TreeParams tree{};
    std::uint64_t seed = 0;
};

struct BoostParams {
    std::size_t n_rounds = 300;
    double learning_rate = 0.05;
    TreeParams tree{3, 20, 1.0, 255};
    std::uint64_t seed = 0;
    std::size_t patience = 0;  // 0 disables early stopping
    double validation_fraction = 0.1;
};

enum class ModelKind { forest, boosted };

struct EnsembleModel {
    ModelKind kind = ModelKind::forest;
    std::vector<RegressionTree> trees;
    double base = 0.0;
    double learning_rate = 1.0;
    std::uint64_t schema_hash = 0;
    std::size_t feature_count = 0;
    std::uint64_t seed = 0;
    /// Training target range; forest predictions are clamped into it.
    double target_min = 0.0;
    double target_max = 0.0;
    ForestParams forest_params{};
    BoostParams boost_params{};
    /// Boosting only: training MSE after 0, 1, ..., trees.size() rounds.
    std::vector<double> train_mse;

    [[nodiscard]] double predict_row(std::span<const double> x) const;
    /// Throws DataError if the matrix schema differs from the training schema.
    [[nodiscard]] std::vector<double> predict(const FeatureMatrix& x) const;

    bool operator==(const EnsembleModel&) const;
};

/// Seed used for tree `index` of a forest fitted with `seed`.
[[nodiscard]] inline std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t index) {
    return derive_seed(seed, index);
}

/// Greedy CART regression tree on squared error. Rows are put in a canonical
/// order first, so the fitted tree does not depend on input row order. Split
/// gain ties go to the lowest feature index, then the lowest threshold.
[[nodiscard]] RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, const TreeParams& params,
                                      Rng& rng);

[[nodiscard]] EnsembleModel fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params,
                                       std::size_t jobs = 1);

[[nodiscard]] EnsembleModel fit_boosted(const FeatureMatrix& x, std::span<const double> y, const BoostParams& params);

struct MetricSet {
    std::optional<double> r2;  // empty when targets have zero variance
    double rmse = 0.0;         // percentage points of growth
    double mae = 0.0;          // percentage points of growth
    std::size_t count = 0;
};

[[nodiscard]] MetricSet evaluate_metrics(std::span<const double> predictions, std::span<const double> targets);

/// Text format "paynet-model 1"; doubles are written as hex floats so a
/// save/load round trip is bit-exact.
void save_model(const EnsembleModel& model, std::ostream& out);
[[nodiscard]] EnsembleModel load_model(std::istream& in);

}  // namespace paynet
