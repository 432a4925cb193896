// Acceptance suite: one PASS/FAIL line per criterion.

#include "evolution_cases.hpp"
#include "invariance.hpp"
#include "oracles.hpp"
#include "paynet/cli.hpp"
#include "paynet/config.hpp"
#include "paynet/dataset.hpp"
#include "paynet/evaluate.hpp"
#include "paynet/features.hpp"
#include "paynet/graph.hpp"
#include "paynet/ingestion.hpp"
#include "paynet/model.hpp"
#include "paynet/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace paynet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
    std::size_t total = 0;
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        ++total;
        if (!ok && failures.size() < 10) failures.push_back(what);
    }
    void note(const std::string& s) { notes.push_back(s); }
};

bool rel_close(double got, double want, double tol) {
    return std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// --- 1 ---------------------------------------------------------------------

void graph_oracles(Check& c) {
    const auto t0 = Clock::now();
    Rng rng(2024);
    std::size_t graphs = 0;
    for (int trial = 0; trial < 160; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(7));
        const double p = 0.1 + 0.8 * rng.uniform();
        const auto a = oracle::random_adj(rng, n, p);
        const auto g = oracle::make_graph(a);
        const std::string tag = "graph " + std::to_string(trial) + " n=" + std::to_string(n);
        ++graphs;

        for (bool weighted : {false, true}) {
            const auto got = betweenness_centrality(g, weighted);
            const auto want = oracle::betweenness(a, weighted);
            for (std::size_t v = 0; v < n; ++v)
                c.expect(rel_close(got[v], want[v], 1e-9), tag + (weighted ? " weighted" : "") + " betweenness");
        }

        const auto cl = clustering_coefficient(g);
        const auto cl_want = oracle::clustering(a);
        for (std::size_t v = 0; v < n; ++v) c.expect(rel_close(cl[v], cl_want[v], 1e-9), tag + " clustering");

        const auto pl = average_path_length(g);
        const auto pl_want = oracle::path_length(a);
        c.expect(pl.reachable_pairs == pl_want.reachable, tag + " reachable pairs");
        c.expect(pl.mean.has_value() == pl_want.mean.has_value(), tag + " path length defined");
        if (pl.mean && pl_want.mean) c.expect(rel_close(*pl.mean, *pl_want.mean, 1e-9), tag + " path length");

        const auto shares = oracle::row_shares(a);
        const auto th = two_hop(g, true);
        const auto th_want = oracle::two_hop(shares);
        const auto raw = two_hop(g, false);
        const auto raw_want = oracle::two_hop(a);
        // with unit weights the raw two-hop entries count paths exactly
        Matrix ones(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) ones(i, j) = a(i, j) > 0.0 ? 1.0 : 0.0;
        const auto counts = two_hop(oracle::make_graph(ones), false);
        const auto counts_want = oracle::two_hop(ones);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                c.expect(rel_close(th(i, j), th_want(i, j), 1e-9), tag + " two-hop");
                c.expect(rel_close(raw(i, j), raw_want(i, j), 1e-9), tag + " raw two-hop");
                c.expect(counts(i, j) == counts_want(i, j), tag + " two-hop path count");
            }

        const auto deg = degree_centrality(g);
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t out = 0, in = 0;
            for (std::size_t u = 0; u < n; ++u) {
                out += (u != v && a(v, u) > 0.0);
                in += (u != v && a(u, v) > 0.0);
            }
            c.expect(deg.out[v] == out && deg.in[v] == in, tag + " degree counts");
        }
    }
    const double s = seconds_since(t0);
    c.expect(graphs >= 100, "at least 100 graphs");
    c.expect(s < 30.0, "runtime under 30 s");
    c.note(std::to_string(graphs) + " graphs, " + fmt("%.2f s", s));
}

// --- 2 ---------------------------------------------------------------------

void eigen_oracle(Check& c) {
    Rng rng(77);
    std::size_t graphs = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(7));
        const auto a = oracle::random_strongly_connected(rng, n, 0.5 * rng.uniform());
        const auto e = eigenvector_centrality(oracle::make_graph(a));
        auto want = oracle::dominant_left_eigenvector(a);
        // align signs before comparing
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += e.values[i] * want[i];
        if (dot < 0) for (double& w : want) w = -w;
        c.expect(e.converged, "converged on graph " + std::to_string(trial));
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::fabs(e.values[i] - want[i]));
            c.expect(std::fabs(e.values[i] - want[i]) <= 1e-6, "oracle mismatch on graph " + std::to_string(trial));
        }
        ++graphs;
    }
    std::size_t complete = 0;
    for (std::size_t n = 2; n <= 40; ++n)
        for (double w : {1.0, 0.3, 7.0, 2.5e9}) {
            Matrix m(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) m(i, j) = w;
            const auto e = eigenvector_centrality(oracle::make_graph(m));
            const double u = 1.0 / std::sqrt(static_cast<double>(n));
            for (double v : e.values) c.expect(v == u, "uniform vector on complete graph n=" + std::to_string(n));
            ++complete;
        }
    c.note(std::to_string(graphs) + " strongly connected graphs, max abs error " + fmt("%.1e", worst) + ", " +
           std::to_string(complete) + " complete graphs exact");
}

// --- 3 ---------------------------------------------------------------------

void invariances(Check& c) {
    const auto outcome = invariance::run(20, 5, 91);
    c.total += outcome.checks;
    for (const auto& f : outcome.failures) c.expect(false, f);
    c.note("20 graphs x 5 scalings x 5 permutations, " + std::to_string(outcome.checks) + " checks");
}

// --- 4 ---------------------------------------------------------------------

void diebold_mariano_checks(Check& c) {
    const std::vector<double> d{3, 1, 2};
    const auto r = diebold_mariano_differential(d);
    c.expect(std::fabs(r.statistic - 3.4641016151377544) <= 1e-9, "hand example " + fmt("%.12f", r.statistic));
    Rng rng(404);
    std::size_t pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 8 + static_cast<std::size_t>(rng.below(200));
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal() * (0.5 + rng.uniform());
        }
        for (std::optional<std::size_t> lag : {std::optional<std::size_t>{}, std::optional<std::size_t>{4}}) {
            const auto ab = diebold_mariano(a, b, lag);
            const auto ba = diebold_mariano(b, a, lag);
            c.expect(ab.statistic == -ba.statistic && ab.p_value == ba.p_value, "antisymmetry");
        }
        ++pairs;
    }
    c.note(fmt("DM(3,1,2) = %.10f", r.statistic) + ", " + std::to_string(pairs) + " random pairs antisymmetric");
}

// --- 5 ---------------------------------------------------------------------

void leakage_probe(Check& c) {
    const SynthConfig sc;
    const auto data = synth_generate(sc, 7);
    const auto quarters = contiguous_quarters(aggregate_quarterly(data.records, data.roster), sc.first, sc.last);
    const std::size_t n = data.roster.size();
    const auto base_snaps = build_snapshots(quarters, n, {}, 0);
    const auto base = assemble_all(base_snaps, growth_rates(quarters), data.roster).combined;

    Rng rng(5);
    std::size_t compared = 0, violations = 0;
    for (std::size_t t = 0; t < quarters.size(); ++t) {
        auto perturbed_q = quarters;
        auto& hit = perturbed_q[t].totals;
        for (auto& [k, v] : hit) v = v * 2 + static_cast<Pence>(rng.below(100000));
        // drop a few pairs so the topology changes too
        for (int drop = 0; drop < 25 && !hit.empty(); ++drop) {
            auto it = hit.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(rng.below(hit.size())));
            hit.erase(it);
        }
        const auto snaps = build_snapshots(perturbed_q, n, {}, 0);
        const auto perturbed = assemble_all(snaps, growth_rates(perturbed_q), data.roster).combined;
        c.expect(perturbed.columns == base.columns, "column layout changed at t=" + std::to_string(t));

        std::map<RowKey, std::size_t> index;
        for (std::size_t r = 0; r < perturbed.rows(); ++r) index.emplace(perturbed.keys[r], r);
        for (std::size_t r = 0; r < base.rows(); ++r) {
            const auto& k = base.keys[r];
            const std::size_t target = base.quarter_index(k.quarter) - 1;  // 0-based
            if (target > t) continue;
            const auto it = index.find(k);
            if (it == index.end()) {
                // only the perturbed quarter's own targets may vanish
                if (target != t) ++violations;
                continue;
            }
            const auto a = base.row(r);
            const auto b = perturbed.row(it->second);
            bool same = std::equal(a.begin(), a.end(), b.begin(), b.end());
            if (target < t) same = same && base.targets[r] == perturbed.targets[it->second];
            if (!same) ++violations;
            ++compared;
        }
        // rows that only the perturbed data produced must target t or later
        for (std::size_t r = 0; r < perturbed.rows(); ++r) {
            const std::size_t target = perturbed.quarter_index(perturbed.keys[r].quarter) - 1;
            if (target < t && !std::binary_search(base.keys.begin(), base.keys.end(), perturbed.keys[r])) ++violations;
        }
    }
    c.expect(violations == 0, std::to_string(violations) + " leaking rows");
    c.expect(compared > 0, "rows compared");
    c.note(std::to_string(quarters.size()) + " quarters perturbed, " + std::to_string(compared) +
           " rows compared, " + std::to_string(violations) + " violations");
}

// --- 6 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void end_to_end(Check& c, const fs::path& scratch) {
    std::vector<double> times;
    for (const char* sub : {"run_a", "run_b"}) {
        const fs::path dir = scratch / sub;
        fs::remove_all(dir);
        std::ostringstream out, err;
        const auto t0 = Clock::now();
        const int code = run_cli({"run", "--seed", "7", "--out", dir.string()}, out, err);
        times.push_back(seconds_since(t0));
        c.expect(code == kExitOk, std::string(sub) + " exit code " + std::to_string(code) + ": " + err.str());
    }
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(scratch / "run_a")) {
        const auto name = entry.path().filename();
        c.expect(fs::exists(scratch / "run_b" / name), name.string() + " missing in second run");
        c.expect(slurp(entry.path()) == slurp(scratch / "run_b" / name), name.string() + " differs");
        ++files;
    }
    c.expect(files >= 7, "report files written");
    for (double t : times) c.expect(t < 600.0, "runtime " + fmt("%.0f s", t));
    c.note(std::to_string(files) + " files identical, runtimes " + fmt("%.0f s", times[0]) + " / " +
           fmt("%.0f s", times[1]));
}

// --- 7 ---------------------------------------------------------------------

void synthetic_headline(Check& c) {
    const RunConfig rc;
    std::size_t passing = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = synth_generate(rc.synth, seed);
        const auto quarters =
            contiguous_quarters(aggregate_quarterly(data.records, data.roster), rc.synth.first, rc.synth.last);
        const auto snaps = build_snapshots(quarters, data.roster.size(), rc.snapshot, rc.jobs);
        const auto bundle =
            assemble_all(snaps, growth_rates(quarters, GrowthOptions{rc.clip}), data.roster, rc.dataset);
        ExperimentOptions opts;
        opts.model = rc.model;
        opts.min_test_rows = rc.min_test_rows;
        opts.seed = seed;
        opts.jobs = rc.jobs;
        const auto report = run_experiment(bundle, expanding_windows(quarters.size(), rc.min_train), opts);
        const auto periods = period_breakdown(report, rc.periods);
        const double overall = report.improvement_pp.value_or(-1e9);
        const double pre = periods[0].improvement_pp.value_or(1e9);
        const double shock = periods[1].improvement_pp.value_or(-1e9);
        const double post = periods[2].improvement_pp.value_or(1e9);
        const bool ok = overall >= 5.0 && shock > pre && shock > post;
        passing += ok;
        c.note("seed " + std::to_string(seed) + ": " + fmt("%+.1f pp", overall) + " overall, periods " +
               fmt("%+.1f", pre) + " / " + fmt("%+.1f", shock) + " / " + fmt("%+.1f", post) + (ok ? "" : " (miss)"));
    }
    c.expect(passing >= 4, std::to_string(passing) + " of 5 seeds meet the direction checks");
}

// --- 8 ---------------------------------------------------------------------

void evolution_arithmetic(Check& c) {
    const auto ev = evolution_summary(evolution_case::density_years());
    c.expect(ev.years.size() == 2, "two years");
    c.expect(rel_close(ev.years[0].density, 0.689, 1e-12), "first-year density");
    c.expect(rel_close(ev.years[1].density, 0.775, 1e-12), "last-year density");
    const double change = ev.change && ev.change->density_pct ? *ev.change->density_pct : NAN;
    c.expect(rel_close(change, (0.775 - 0.689) / 0.689 * 100.0, 1e-9), "density change");
    c.expect(std::round(change * 10.0) / 10.0 == 12.5, "density change rounds to +12.5%");

    const auto vol = evolution_summary(evolution_case::volume_quarter());
    const double share = vol.shares.empty() ? NAN : vol.shares[0].share;
    c.expect(!vol.shares.empty() && vol.shares[0].industry == 0, "largest industry first");
    c.expect(rel_close(share, 4.18 / 22.1, 1e-12), "volume share");
    c.expect(std::round(share * 1000.0) / 10.0 == 18.9, "share rounds to 18.9%");
    c.note("density change " + fmt("%+.2f%%", change) + ", top share " + fmt("%.2f%%", share * 100.0));
}

// --- 9 ---------------------------------------------------------------------

struct Table {
    std::vector<double> values, y;
    std::vector<ColumnKind> kinds;
    std::size_t cols = 0;
    [[nodiscard]] FeatureMatrix matrix() const { return {values, y.size(), cols, kinds, 0x99}; }
};

Table regression_table(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Table t;
    t.cols = 4;
    t.kinds = {ColumnKind::numeric, ColumnKind::numeric, ColumnKind::categorical, ColumnKind::numeric};
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = rng.uniform() * 2 - 1, x1 = rng.uniform(), x3 = rng.normal();
        const auto x2 = static_cast<double>(rng.below(3));
        t.values.insert(t.values.end(), {x0, x1, x2, x3});
        t.y.push_back(std::sin(3 * x0) + x1 * x1 + 0.5 * x2 + 0.3 * rng.normal());
    }
    return t;
}

void model_suite(Check& c) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto t = regression_table(300, seed);
        ForestParams fp;
        fp.n_trees = 1;
        fp.bootstrap = false;
        fp.tree = TreeParams{6, 3, 1.0, 255};
        fp.seed = seed;
        const auto forest = fit_forest(t.matrix(), t.y, fp);
        Rng rng(forest_tree_seed(seed, 0));
        const auto tree = fit_tree(t.matrix(), t.y, fp.tree, rng);
        c.expect(forest.trees.size() == 1 && forest.trees[0] == tree, "degenerate forest tree");
        const auto fpred = forest.predict(t.matrix());
        for (std::size_t i = 0; i < t.y.size(); ++i)
            c.expect(fpred[i] == tree.predict(t.matrix().row(i)), "degenerate forest prediction");

        BoostParams zero;
        zero.n_rounds = 0;
        const auto mean_model = fit_boosted(t.matrix(), t.y, zero);
        const double mean = std::accumulate(t.y.begin(), t.y.end(), 0.0) / static_cast<double>(t.y.size());
        for (double v : mean_model.predict(t.matrix())) c.expect(rel_close(v, mean, 1e-15), "zero-round boosting");

        for (double lr : {0.05, 0.3, 1.0}) {
            BoostParams bp;
            bp.n_rounds = 50;
            bp.learning_rate = lr;
            bp.seed = seed;
            const auto m = fit_boosted(t.matrix(), t.y, bp);
            for (std::size_t r = 1; r < m.train_mse.size(); ++r)
                c.expect(m.train_mse[r] <= m.train_mse[r - 1], "boosting MSE increased");
        }
    }

    const std::vector<double> y{0.1, 0.2, 0.3, 0.6};
    const auto exact = evaluate_metrics(y, y);
    c.expect(exact.r2 == 1.0 && exact.rmse == 0.0 && exact.mae == 0.0, "perfect forecast metrics");
    const std::vector<double> t2{0.0, 0.1}, p2{0.1, 0.0};
    const auto hand = evaluate_metrics(p2, t2);
    c.expect(hand.rmse == 10.0 && hand.mae == 10.0, "winsorized hand case");
    // growth rates; errors are reported in percentage points
    const std::vector<double> p3{0.25, 0.5, 1.0}, y3{0.25, 0.75, 0.75};
    const auto m3 = evaluate_metrics(p3, y3);
    // residuals 0, -25, +25 pp; target mean 7/12; total sum of squares 1/6
    c.expect(rel_close(m3.rmse, std::sqrt(1250.0 / 3.0), 1e-14), "rmse hand case");
    c.expect(rel_close(m3.mae, 50.0 / 3.0, 1e-14), "mae hand case");
    c.expect(m3.r2 && rel_close(*m3.r2, 1.0 - 0.125 / (1.0 / 6.0), 1e-14), "r2 hand case");
    const std::vector<double> flat{0.5, 0.5};
    c.expect(!evaluate_metrics(t2, flat).r2.has_value(), "r2 undefined for constant targets");
    c.note("forest/boosting equivalences on 5 seeds, metric hand cases");
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "paynet_acceptance";
    fs::create_directories(scratch);

    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> body;
    };
    const std::vector<Criterion> criteria{
        {1, "graph metrics match brute-force oracles", graph_oracles},
        {2, "eigenvector centrality matches a dense eigen-solver", eigen_oracle},
        {3, "features invariant to scaling and relabelling", invariances},
        {4, "Diebold-Mariano hand example and antisymmetry", diebold_mariano_checks},
        {5, "no look-ahead leakage over the full synthetic run", leakage_probe},
        {6, "end-to-end runs are byte-identical and under 10 min", [&](Check& c) { end_to_end(c, scratch); }},
        {7, "network features improve forecasts, most in the shock period", synthetic_headline},
        {8, "evolution change row and volume share arithmetic", evolution_arithmetic},
        {9, "model equivalences and metric identities", model_suite},
    };

    // optional criterion ids after the scratch directory select a subset
    std::vector<int> only;
    for (int i = 2; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failed = 0;
    std::size_t ran = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), cr.id) == only.end()) continue;
        ++ran;
        Check c;
        const auto t0 = Clock::now();
        try {
            cr.body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const bool ok = c.failures.empty();
        failed += !ok;
        std::printf("%s %d %s (%zu checks, %.1f s)\n", ok ? "PASS" : "FAIL", cr.id, cr.name, c.total,
                    seconds_since(t0));
        for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
        for (const auto& f : c.failures) std::printf("    failed: %s\n", f.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failed, ran);
    return failed == 0 ? 0 : 1;
}
