#pragma once

// Exact scale and relabelling checks on extract_features.

#include "oracles.hpp"
#include "paynet/features.hpp"

#include <string>
#include <vector>

namespace invariance {

using paynet::FeatureSet;

struct Outcome {
    std::size_t checks = 0;
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && failures.size() < 20) failures.push_back(what);
    }
};

/// Scalings that are powers of two, so c * w is exact and sums of scaled
/// values equal c times sums of the originals bit for bit.
inline const std::vector<double>& dyadic_scalings() {
    static const std::vector<double> s{0.125, 0.5, 2.0, 64.0, 1048576.0};
    return s;
}

/// Scalings with inexact products; only the topology-driven features are
/// required to be bit-identical under these.
inline const std::vector<double>& general_scalings() {
    static const std::vector<double> s{3.0, 0.1, 7.77, 1e6, 1e-4};
    return s;
}

inline void check_topology(Outcome& out, const FeatureSet& a, const FeatureSet& b, const std::string& tag) {
    out.expect(a.nodes.in_degree == b.nodes.in_degree, tag + ": in_degree");
    out.expect(a.nodes.out_degree == b.nodes.out_degree, tag + ": out_degree");
    out.expect(a.nodes.betweenness == b.nodes.betweenness, tag + ": betweenness");
    out.expect(a.nodes.clustering == b.nodes.clustering, tag + ": clustering");
    out.expect(a.global.density == b.global.density, tag + ": density");
    out.expect(a.global.edge_count == b.global.edge_count, tag + ": edge_count");
    out.expect(a.global.avg_path_length == b.global.avg_path_length, tag + ": avg_path_length");
    out.expect(a.global.reachable_fraction == b.global.reachable_fraction, tag + ": reachable_fraction");
    out.expect(a.global.mean_clustering == b.global.mean_clustering, tag + ": mean_clustering");
}

inline bool near(const std::vector<double>& a, const std::vector<double>& b, double rel) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > rel * std::max(1.0, std::fabs(b[i]))) return false;
    return true;
}

inline std::vector<double> times(std::vector<double> v, double c) {
    for (double& x : v) x *= c;
    return v;
}

template <typename T>
std::vector<T> permute(const std::vector<T>& v, const std::vector<std::size_t>& perm) {
    std::vector<T> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[perm[i]] = v[i];
    return out;
}

/// graphs x (dyadic + general scalings) x permutations, each compared against
/// the features of the original graph.
inline Outcome run(std::size_t graphs, std::size_t perms, std::uint64_t seed) {
    Outcome out;
    paynet::Rng rng(seed);
    for (std::size_t gi = 0; gi < graphs; ++gi) {
        const std::size_t n = 3 + static_cast<std::size_t>(rng.below(10));
        const auto g = oracle::make_graph(oracle::random_adj(rng, n, 0.2 + 0.6 * rng.uniform()));
        const auto base = paynet::extract_features(g);
        const std::string gtag = "graph " + std::to_string(gi);

        for (double c : dyadic_scalings()) {
            const auto s = paynet::extract_features(g.scaled(c));
            const std::string tag = gtag + " x" + std::to_string(c);
            check_topology(out, base, s, tag);
            out.expect(s.nodes.in_strength == times(base.nodes.in_strength, c), tag + ": in_strength");
            out.expect(s.nodes.out_strength == times(base.nodes.out_strength, c), tag + ": out_strength");
            out.expect(s.nodes.eigenvector == base.nodes.eigenvector, tag + ": eigenvector");
        }
        for (double c : general_scalings()) {
            const auto s = paynet::extract_features(g.scaled(c));
            const std::string tag = gtag + " x" + std::to_string(c);
            check_topology(out, base, s, tag);
            out.expect(near(s.nodes.in_strength, times(base.nodes.in_strength, c), 1e-12), tag + ": in_strength");
            out.expect(near(s.nodes.eigenvector, base.nodes.eigenvector, 1e-12), tag + ": eigenvector");
        }
        for (std::size_t pi = 0; pi < perms; ++pi) {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
            const auto p = paynet::extract_features(g.permuted(perm));
            const std::string tag = gtag + " perm " + std::to_string(pi);
            out.expect(p.nodes.in_degree == permute(base.nodes.in_degree, perm), tag + ": in_degree");
            out.expect(p.nodes.out_degree == permute(base.nodes.out_degree, perm), tag + ": out_degree");
            out.expect(p.nodes.in_strength == permute(base.nodes.in_strength, perm), tag + ": in_strength");
            out.expect(p.nodes.out_strength == permute(base.nodes.out_strength, perm), tag + ": out_strength");
            out.expect(p.nodes.betweenness == permute(base.nodes.betweenness, perm), tag + ": betweenness");
            out.expect(p.nodes.eigenvector == permute(base.nodes.eigenvector, perm), tag + ": eigenvector");
            out.expect(p.nodes.clustering == permute(base.nodes.clustering, perm), tag + ": clustering");
            out.expect(p.global.density == base.global.density, tag + ": density");
            out.expect(p.global.avg_path_length == base.global.avg_path_length, tag + ": avg_path_length");
            out.expect(p.global.mean_clustering == base.global.mean_clustering, tag + ": mean_clustering");
            out.expect(p.global.reachable_fraction == base.global.reachable_fraction, tag + ": reachable_fraction");
        }
    }
    return out;
}

}  // namespace invariance
