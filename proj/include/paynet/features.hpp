#pragma once

#include "paynet/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace paynet {

struct DegreeCentrality {
    std::vector<std::uint32_t> in;
    std::vector<std::uint32_t> out;
};

struct StrengthCentrality {
    std::vector<double> in;   // column sums, GBP
    std::vector<double> out;  // row sums, GBP
};

struct EigenvectorResult {
    std::vector<double> values;  // unit Euclidean norm, or all zero
    bool converged = false;
    std::size_t iterations = 0;
};

enum class EigenDirection {
    left,   // x <- x^T A: importance flows along payments, to the payee
    right,  // x <- A x
};

struct PathLengthResult {
    std::optional<double> mean;  // empty when no ordered pair is reachable
    double reachable_fraction = 0.0;
    std::uint64_t reachable_pairs = 0;
};

[[nodiscard]] DegreeCentrality degree_centrality(const QuarterlyGraph& graph);
[[nodiscard]] StrengthCentrality strength_centrality(const QuarterlyGraph& graph);

/// Sum over ordered pairs (s, d), s != v != d, of the fraction of shortest
/// s->d paths through v; unreachable pairs contribute nothing. Unweighted mode
/// counts hops, weighted mode uses edge length 1/w. Brandes accumulation.
[[nodiscard]] std::vector<double> betweenness_centrality(const QuarterlyGraph& graph, bool weighted = false);

/// Raw betweenness divided by (n-1)(n-2), the number of ordered pairs that
/// exclude the node. Zero for n < 3.
[[nodiscard]] std::vector<double> normalize_betweenness(std::span<const double> raw);

inline constexpr double kEigenTolerance = 1e-10;
inline constexpr std::size_t kEigenMaxIterations = 1000;

/// Power iteration from the uniform vector, renormalised to unit length each
/// step, until successive iterates differ by < 1e-10 (max-abs) or 1000 steps.
/// If that fails (periodic graphs), the iteration is repeated on A + wI with
/// w the largest weight, which has the same eigenvectors.
[[nodiscard]] EigenvectorResult eigenvector_centrality(const QuarterlyGraph& graph,
                                                       EigenDirection direction = EigenDirection::left);

/// Directed local clustering. The neighbourhood is the union of in- and
/// out-neighbours; the numerator counts directed edges among neighbours (a
/// mutual pair counts twice) over |N| (|N| - 1). Zero when |N| < 2.
[[nodiscard]] std::vector<double> clustering_coefficient(const QuarterlyGraph& graph);

/// |E| / (n (n - 1)).
[[nodiscard]] double network_density(const QuarterlyGraph& graph);

/// Mean hop distance over ordered reachable pairs.
[[nodiscard]] PathLengthResult average_path_length(const QuarterlyGraph& graph);

struct NodeFeatures {
    std::vector<std::uint32_t> in_degree;
    std::vector<std::uint32_t> out_degree;
    std::vector<double> in_strength;
    std::vector<double> out_strength;
    std::vector<double> betweenness;             // raw
    std::vector<double> betweenness_normalized;  // raw / ((n-1)(n-2))
    std::vector<double> eigenvector;
    std::vector<double> clustering;
    bool eigenvector_converged = false;

    [[nodiscard]] std::size_t size() const { return in_degree.size(); }
};

struct GlobalFeatures {
    double density = 0.0;
    std::optional<double> avg_path_length;
    double reachable_fraction = 0.0;
    double mean_clustering = 0.0;
    std::size_t edge_count = 0;
};

struct FeatureOptions {
    bool weighted_betweenness = false;
    EigenDirection eigen_direction = EigenDirection::left;
};

struct FeatureSet {
    Quarter quarter;
    NodeFeatures nodes;
    GlobalFeatures global;
};

[[nodiscard]] FeatureSet extract_features(const QuarterlyGraph& graph, const FeatureOptions& options = {});

/// Sum of values in ascending order. Gives a result that does not depend on
/// the order of the input, which keeps node relabelling exact.
[[nodiscard]] double ordered_sum(std::vector<double> values);

}  // namespace paynet
