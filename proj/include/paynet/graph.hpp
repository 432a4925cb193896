#pragma once

#include "paynet/common.hpp"
#include "paynet/ingestion.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace paynet {

/// Dense row-major square matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// C = A * B, i-k-j loop order.
[[nodiscard]] Matrix multiply(const Matrix& a, const Matrix& b);

/// Directed weighted payment graph for one quarter. adj(i, j) is the GBP
/// paid from industry i to industry j; an edge exists where it is > 0.
class QuarterlyGraph {
public:
    QuarterlyGraph(Quarter quarter, Matrix adj);

    [[nodiscard]] Quarter quarter() const { return quarter_; }
    [[nodiscard]] std::size_t node_count() const { return adj_.size(); }
    [[nodiscard]] const Matrix& adj() const { return adj_; }
    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const { return i != j && adj_(i, j) > 0.0; }
    /// Strictly positive off-diagonal entries.
    [[nodiscard]] std::size_t edge_count() const;

    /// Graph with every weight multiplied by c > 0.
    [[nodiscard]] QuarterlyGraph scaled(double c) const;
    /// Relabels nodes: node i of this graph becomes node perm[i].
    [[nodiscard]] QuarterlyGraph permuted(std::span<const std::size_t> perm) const;

private:
    Quarter quarter_;
    Matrix adj_;
};

/// Row-proportional allocation matrix: nadj(i, j) is the share of i's total
/// outgoing payments that went to j. All-zero rows stay zero.
struct NormalizedGraph {
    Quarter quarter;
    Matrix nadj;
};

[[nodiscard]] QuarterlyGraph build_graph(const PairTotals& totals, const IndustryRoster& roster);
[[nodiscard]] QuarterlyGraph build_graph(const PairTotals& totals, std::size_t node_count);

[[nodiscard]] NormalizedGraph row_normalize(const QuarterlyGraph& graph);

/// Sum over all two-step paths, B = M * M with M the raw or row-normalised
/// adjacency.
[[nodiscard]] Matrix two_hop(const QuarterlyGraph& graph, bool normalized = true);

}  // namespace paynet
