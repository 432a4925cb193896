#include "paynet/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <utility>

namespace paynet {

namespace {

using AdjacencyList = std::vector<std::vector<std::size_t>>;

AdjacencyList out_neighbours(const QuarterlyGraph& g) {
    const std::size_t n = g.node_count();
    AdjacencyList out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (g.has_edge(i, j)) out[i].push_back(j);
    return out;
}

// Single-source shortest-path DAG: settled order, path counts and
// predecessor lists.
struct ShortestPathDag {
    std::vector<std::size_t> order;
    std::vector<double> sigma;
    std::vector<std::vector<std::size_t>> preds;
};

void bfs_dag(const AdjacencyList& adj, std::size_t s, ShortestPathDag& dag, std::vector<long>& dist) {
    const std::size_t n = adj.size();
    dag.order.clear();
    std::fill(dag.sigma.begin(), dag.sigma.end(), 0.0);
    for (auto& p : dag.preds) p.clear();
    std::fill(dist.begin(), dist.end(), -1L);

    std::vector<std::size_t> queue;
    queue.reserve(n);
    queue.push_back(s);
    dist[s] = 0;
    dag.sigma[s] = 1.0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t v = queue[head];
        dag.order.push_back(v);
        for (std::size_t w : adj[v]) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if (dist[w] == dist[v] + 1) {
                dag.sigma[w] += dag.sigma[v];
                dag.preds[w].push_back(v);
            }
        }
    }
}

void dijkstra_dag(const QuarterlyGraph& g, const AdjacencyList& adj, std::size_t s, ShortestPathDag& dag,
                  std::vector<double>& dist) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    dag.order.clear();
    std::fill(dag.sigma.begin(), dag.sigma.end(), 0.0);
    for (auto& p : dag.preds) p.clear();
    std::fill(dist.begin(), dist.end(), inf);
    std::vector<char> settled(adj.size(), 0);

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0.0;
    dag.sigma[s] = 1.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (settled[v] || d > dist[v]) continue;
        settled[v] = 1;
        dag.order.push_back(v);
        for (std::size_t w : adj[v]) {
            const double candidate = dist[v] + 1.0 / g.adj()(v, w);
            if (candidate < dist[w]) {
                dist[w] = candidate;
                dag.sigma[w] = dag.sigma[v];
                dag.preds[w].assign(1, v);
                heap.emplace(candidate, w);
            } else if (candidate == dist[w]) {
                dag.sigma[w] += dag.sigma[v];
                dag.preds[w].push_back(v);
            }
        }
    }
}

}  // namespace

double ordered_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

DegreeCentrality degree_centrality(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    DegreeCentrality out{std::vector<std::uint32_t>(n, 0), std::vector<std::uint32_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (graph.has_edge(i, j)) {
                ++out.out[i];
                ++out.in[j];
            }
    return out;
}

StrengthCentrality strength_centrality(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    StrengthCentrality out{std::vector<double>(n), std::vector<double>(n)};
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = graph.adj().row(i);
        out.out[i] = ordered_sum({row.begin(), row.end()});
        for (std::size_t k = 0; k < n; ++k) column[k] = graph.adj()(k, i);
        out.in[i] = ordered_sum(column);
    }
    return out;
}

std::vector<double> betweenness_centrality(const QuarterlyGraph& graph, bool weighted) {
    const std::size_t n = graph.node_count();
    const auto adj = out_neighbours(graph);

    ShortestPathDag dag{{}, std::vector<double>(n), std::vector<std::vector<std::size_t>>(n)};
    std::vector<long> hop_dist(n);
    std::vector<double> weighted_dist(n);
    std::vector<double> delta(n);
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<double> terms;
    // dependency[v * n + s]: what source s contributes to v
    std::vector<double> dependency(n * n, 0.0);

    // Every sum runs over sorted terms so the result does not depend on node
    // labels.
    for (std::size_t s = 0; s < n; ++s) {
        if (weighted)
            dijkstra_dag(graph, adj, s, dag, weighted_dist);
        else
            bfs_dag(adj, s, dag, hop_dist);
        for (auto& l : succ) l.clear();
        for (std::size_t w : dag.order)
            for (std::size_t v : dag.preds[w]) succ[v].push_back(w);

        for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
            const std::size_t v = *it;
            terms.clear();
            for (std::size_t w : succ[v]) terms.push_back(dag.sigma[v] / dag.sigma[w] * (1.0 + delta[w]));
            delta[v] = ordered_sum(terms);
            if (v != s) dependency[v * n + s] = delta[v];
        }
    }
    std::vector<double> centrality(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        centrality[v] = ordered_sum({dependency.begin() + static_cast<std::ptrdiff_t>(v * n),
                                     dependency.begin() + static_cast<std::ptrdiff_t>((v + 1) * n)});
    return centrality;
}

std::vector<double> normalize_betweenness(std::span<const double> raw) {
    const std::size_t n = raw.size();
    std::vector<double> out(n, 0.0);
    if (n < 3) return out;
    const double pairs = static_cast<double>((n - 1) * (n - 2));
    for (std::size_t i = 0; i < n; ++i) out[i] = raw[i] / pairs;
    return out;
}

namespace {

enum class Iteration { converged, stalled, collapsed };

// Power iteration on A + shift I. `x` holds the last iterate, or zeros when
// the iterate collapsed.
Iteration power_iterate(const Matrix& a, EigenDirection direction, double shift, std::vector<double>& x,
                   std::size_t& iterations) {
    const std::size_t n = x.size();
    std::fill(x.begin(), x.end(), 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n);
    std::vector<double> terms(n + 1);
    for (std::size_t it = 1; it <= kEigenMaxIterations; ++it) {
        // sorted-term sums keep the iterate independent of node labels
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i)
                terms[i] = direction == EigenDirection::left ? x[i] * a(i, j) : a(j, i) * x[i];
            terms[n] = shift * x[j];
            y[j] = ordered_sum(terms);
        }
        ++iterations;
        // scale by the largest entry first: equal entries become exactly 1
        const double peak = *std::max_element(y.begin(), y.end());
        if (!(peak > 0.0)) {
            std::fill(x.begin(), x.end(), 0.0);
            return Iteration::collapsed;
        }
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= peak;
            terms[i] = y[i] * y[i];
        }
        terms[n] = 0.0;
        const double norm = std::sqrt(ordered_sum(terms));
        if (!(norm > 0.0)) {
            std::fill(x.begin(), x.end(), 0.0);
            return Iteration::collapsed;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= norm;
            diff = std::max(diff, std::fabs(y[i] - x[i]));
        }
        std::swap(x, y);
        if (diff < kEigenTolerance) return Iteration::converged;
    }
    return Iteration::stalled;
}

}  // namespace

EigenvectorResult eigenvector_centrality(const QuarterlyGraph& graph, EigenDirection direction) {
    const std::size_t n = graph.node_count();
    const Matrix& a = graph.adj();
    EigenvectorResult result;
    result.values.assign(n, 0.0);
    if (n == 0) return result;

    std::vector<double> x(n);
    auto outcome = power_iterate(a, direction, 0.0, x, result.iterations);
    if (outcome == Iteration::stalled) {
        // periodic graphs make the plain iteration oscillate; A + wI has the
        // same eigenvectors and a unique dominant eigenvalue
        double heaviest = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) heaviest = std::max(heaviest, a(i, j));
        outcome = power_iterate(a, direction, heaviest, x, result.iterations);
    }
    result.converged = outcome == Iteration::converged;
    result.values = x;
    return result;
}

std::vector<double> clustering_coefficient(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    std::vector<char> edge(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) edge[i * n + j] = graph.has_edge(i, j) ? 1 : 0;

    std::vector<double> out(n, 0.0);
    std::vector<std::size_t> hood;
    for (std::size_t i = 0; i < n; ++i) {
        hood.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && (edge[i * n + j] || edge[j * n + i])) hood.push_back(j);
        const std::size_t k = hood.size();
        if (k < 2) continue;
        std::uint64_t links = 0;
        for (std::size_t a : hood)
            for (std::size_t b : hood) links += edge[a * n + b];  // diagonal is never an edge
        out[i] = static_cast<double>(links) / static_cast<double>(k * (k - 1));
    }
    return out;
}

double network_density(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    if (n < 2) throw ConfigError("density needs at least 2 nodes");
    return static_cast<double>(graph.edge_count()) / static_cast<double>(n * (n - 1));
}

PathLengthResult average_path_length(const QuarterlyGraph& graph) {
    const std::size_t n = graph.node_count();
    const auto adj = out_neighbours(graph);
    std::uint64_t total = 0;
    std::uint64_t pairs = 0;
    std::vector<long> dist(n);
    std::vector<std::size_t> queue;
    queue.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1L);
        queue.assign(1, s);
        dist[s] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t v = queue[head];
            for (std::size_t w : adj[v])
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    total += static_cast<std::uint64_t>(dist[w]);
                    ++pairs;
                    queue.push_back(w);
                }
        }
    }
    PathLengthResult out;
    out.reachable_pairs = pairs;
    if (n >= 2) out.reachable_fraction = static_cast<double>(pairs) / static_cast<double>(n * (n - 1));
    if (pairs > 0) out.mean = static_cast<double>(total) / static_cast<double>(pairs);
    return out;
}

FeatureSet extract_features(const QuarterlyGraph& graph, const FeatureOptions& options) {
    FeatureSet fs;
    fs.quarter = graph.quarter();
    auto degrees = degree_centrality(graph);
    auto strengths = strength_centrality(graph);
    auto eigen = eigenvector_centrality(graph, options.eigen_direction);

    NodeFeatures& nodes = fs.nodes;
    nodes.in_degree = std::move(degrees.in);
    nodes.out_degree = std::move(degrees.out);
    nodes.in_strength = std::move(strengths.in);
    nodes.out_strength = std::move(strengths.out);
    nodes.betweenness = betweenness_centrality(graph, options.weighted_betweenness);
    nodes.betweenness_normalized = normalize_betweenness(nodes.betweenness);
    nodes.eigenvector = std::move(eigen.values);
    nodes.eigenvector_converged = eigen.converged;
    nodes.clustering = clustering_coefficient(graph);

    GlobalFeatures& g = fs.global;
    const std::size_t n = graph.node_count();
    g.edge_count = graph.edge_count();
    g.density = n >= 2 ? network_density(graph) : 0.0;
    const auto paths = average_path_length(graph);
    g.avg_path_length = paths.mean;
    g.reachable_fraction = paths.reachable_fraction;
    g.mean_clustering = n > 0 ? ordered_sum(nodes.clustering) / static_cast<double>(n) : 0.0;
    return fs;
}

}  // namespace paynet
