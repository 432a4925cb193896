#include "paynet/graph.hpp"

#include <limits>
#include <string>

namespace paynet {

Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
        }
    }
    return c;
}

QuarterlyGraph::QuarterlyGraph(Quarter quarter, Matrix adj) : quarter_(quarter), adj_(std::move(adj)) {
    for (double w : adj_.data())
        if (!(w >= 0.0) || w == std::numeric_limits<double>::infinity())
            throw DataError("adjacency weights must be finite and non-negative");
}

std::size_t QuarterlyGraph::edge_count() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < node_count(); ++i)
        for (std::size_t j = 0; j < node_count(); ++j) m += has_edge(i, j) ? 1 : 0;
    return m;
}

QuarterlyGraph QuarterlyGraph::scaled(double c) const {
    Matrix m(node_count());
    for (std::size_t i = 0; i < node_count(); ++i)
        for (std::size_t j = 0; j < node_count(); ++j) m(i, j) = adj_(i, j) * c;
    return {quarter_, std::move(m)};
}

QuarterlyGraph QuarterlyGraph::permuted(std::span<const std::size_t> perm) const {
    const std::size_t n = node_count();
    if (perm.size() != n) throw ConfigError("permutation size does not match node count");
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(perm[i], perm[j]) = adj_(i, j);
    return {quarter_, std::move(m)};
}

QuarterlyGraph build_graph(const PairTotals& totals, std::size_t node_count) {
    Matrix adj(node_count);
    for (const auto& [key, value] : totals.totals) {
        if (key.first >= node_count || key.second >= node_count)
            throw DataError("pair index out of range for roster of size " + std::to_string(node_count));
        adj(key.first, key.second) = pence_to_gbp(value);
    }
    return {totals.quarter, std::move(adj)};
}

QuarterlyGraph build_graph(const PairTotals& totals, const IndustryRoster& roster) {
    return build_graph(totals, roster.size());
}

NormalizedGraph row_normalize(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    NormalizedGraph out{graph.quarter(), Matrix(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = graph.adj().row(i);
        double sum = 0.0;
        for (double w : row) sum += w;
        if (sum <= 0.0) continue;
        auto dst = out.nadj.row(i);
        for (std::size_t j = 0; j < n; ++j) dst[j] = row[j] / sum;
    }
    return out;
}

Matrix two_hop(const QuarterlyGraph& graph, bool normalized) {
    if (normalized) {
        const auto ng = row_normalize(graph);
        return multiply(ng.nadj, ng.nadj);
    }
    return multiply(graph.adj(), graph.adj());
}

}  // namespace paynet
