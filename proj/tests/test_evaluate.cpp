#include "evolution_cases.hpp"
#include "fixtures.hpp"
#include "paynet/evaluate.hpp"

#include <doctest.h>

#include <cmath>

using namespace paynet;

namespace {

ExperimentOptions quick_options(std::uint64_t seed = 1) {
    ExperimentOptions o;
    o.model.forest.n_trees = 8;
    o.model.forest.tree.min_leaf = 5;
    o.min_test_rows = 10;
    o.seed = seed;
    o.jobs = 2;
    return o;
}

struct Experiment {
    fixture::Sample sample;
    DatasetBundle bundle;
    std::vector<WindowSplit> windows;
};

Experiment small_experiment(std::uint64_t seed) {
    Experiment e{fixture::make_sample(fixture::small_config(10, {2019, 4}), seed), {}, {}};
    e.bundle = assemble_all(e.sample.snapshots, e.sample.growth, e.sample.data.roster);
    e.windows = expanding_windows(e.sample.quarters.size(), 6);
    return e;
}

}  // namespace

TEST_CASE("Diebold-Mariano hand example") {
    const std::vector<double> d{3, 1, 2};
    const auto r = diebold_mariano_differential(d);
    CHECK(r.status == DmStatus::ok);
    CHECK(r.mean_differential == 2.0);
    CHECK(r.variance_of_mean == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::fabs(r.statistic - 2.0 / std::sqrt(1.0 / 3.0)) <= 1e-9);
    CHECK(std::fabs(r.statistic - 3.4641016151377544) <= 1e-9);
    CHECK(r.p_value == doctest::Approx(std::erfc(r.statistic / std::sqrt(2.0))));
}

TEST_CASE("Diebold-Mariano degenerate inputs") {
    const std::vector<double> e{0.1, -0.2, 0.3, 0.05, -0.1, 0.2, 0.0, 0.4};
    const auto same = diebold_mariano(e, e);
    CHECK(same.status == DmStatus::indistinguishable);
    std::vector<double> shifted(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) shifted[i] = e[i] == 0.0 ? 0.0 : -e[i];
    CHECK(diebold_mariano(e, shifted).status == DmStatus::indistinguishable);
    const std::vector<double> constant{1.0, 1.0, 1.0};
    CHECK_THROWS_AS((void)diebold_mariano_differential(constant), DataError);
    const std::vector<double> short_e{0.1, 0.2, 0.3};
    CHECK_THROWS_AS((void)diebold_mariano(short_e, short_e), DataError);
    CHECK_THROWS_AS((void)diebold_mariano(e, short_e), DataError);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS((void)diebold_mariano_differential(one), DataError);
}

TEST_CASE("Diebold-Mariano antisymmetry") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(40), b(40);
        for (std::size_t i = 0; i < 40; ++i) {
            a[i] = rng.normal();
            b[i] = 0.8 * rng.normal();
        }
        for (std::optional<std::size_t> lag : {std::optional<std::size_t>{}, std::optional<std::size_t>{3}}) {
            const auto ab = diebold_mariano(a, b, lag);
            const auto ba = diebold_mariano(b, a, lag);
            CHECK(ab.statistic == -ba.statistic);
            CHECK(ab.p_value == ba.p_value);
        }
    }
}

TEST_CASE("HAC variance with lag 0 is the biased plain estimator") {
    Rng rng(6);
    std::vector<double> d(30);
    for (double& v : d) v = rng.normal() + 0.3;
    const auto plain = diebold_mariano_differential(d);
    const auto hac0 = diebold_mariano_differential(d, 0);
    CHECK(hac0.statistic == doctest::Approx(plain.statistic * std::sqrt(30.0 / 29.0)).epsilon(1e-12));
    const auto hac = diebold_mariano_differential(d, 4);
    CHECK(hac.hac_lag == 4u);
    CHECK(std::isfinite(hac.statistic));
}

TEST_CASE("loss differential") {
    const std::vector<double> a{1, 2}, b{0.5, 3};
    CHECK(loss_differential(a, b) == std::vector<double>{0.75, -5.0});
}

TEST_CASE("experiment structure and pooled statistics") {
    const auto e = small_experiment(2);
    const auto report = run_experiment(e.bundle, e.windows, quick_options());
    REQUIRE(report.windows.size() == e.windows.size());
    std::size_t used_rows = 0;
    for (const auto& w : report.windows) {
        CHECK(w.test_quarter == e.bundle.combined.first_quarter.next().next().next().next().next().next());
        break;
    }
    for (const auto& w : report.windows)
        if (!w.excluded) used_rows += w.test_rows;
    CHECK(report.forecasts.size() == used_rows);
    CHECK(std::is_sorted(report.forecasts.begin(), report.forecasts.end(),
                         [](const auto& a, const auto& b) { return a.key < b.key; }));

    for (std::size_t s = 0; s < 3; ++s) {
        const auto spec = kSpecifications[s];
        std::vector<double> p, y;
        for (const auto& f : report.forecasts) {
            p.push_back(f.prediction[s]);
            y.push_back(f.target);
        }
        const auto direct = evaluate_metrics(p, y);
        const auto& pooled = report.spec(spec).pooled;
        CHECK(pooled.count == report.forecasts.size());
        CHECK(*pooled.r2 == doctest::Approx(*direct.r2).epsilon(1e-12));
        double sq = 0.0, abs = 0.0;
        std::size_t n = 0;
        for (const auto& w : report.windows) {
            if (w.excluded) continue;
            sq += static_cast<double>(w.metrics[s]->count) * w.metrics[s]->rmse * w.metrics[s]->rmse;
            abs += static_cast<double>(w.metrics[s]->count) * w.metrics[s]->mae;
            n += w.metrics[s]->count;
        }
        CHECK(pooled.rmse == doctest::Approx(std::sqrt(sq / static_cast<double>(n))).epsilon(1e-12));
        CHECK(pooled.mae == doctest::Approx(abs / static_cast<double>(n)).epsilon(1e-12));
    }
    CHECK(*report.improvement_pp ==
          doctest::Approx((*report.spec(Specification::combined).pooled.r2 -
                           *report.spec(Specification::traditional).pooled.r2) *
                          100.0));
    REQUIRE(report.dm.has_value());
}

TEST_CASE("experiments are reproducible and independent of thread count") {
    const auto e = small_experiment(3);
    auto o = quick_options(9);
    const auto a = run_experiment(e.bundle, e.windows, o);
    o.jobs = 1;
    const auto b = run_experiment(e.bundle, e.windows, o);
    REQUIRE(a.forecasts.size() == b.forecasts.size());
    for (std::size_t i = 0; i < a.forecasts.size(); ++i) CHECK(a.forecasts[i].prediction == b.forecasts[i].prediction);
}

TEST_CASE("identical feature blocks give identical metrics") {
    auto e = small_experiment(4);
    e.bundle.network = e.bundle.traditional;
    e.bundle.network.spec = Specification::network;
    const auto report = run_experiment(e.bundle, e.windows, quick_options());
    const auto& t = report.spec(Specification::traditional).pooled;
    const auto& n = report.spec(Specification::network).pooled;
    CHECK(t.r2 == n.r2);
    CHECK(t.rmse == n.rmse);
    CHECK(t.mae == n.mae);
}

TEST_CASE("small windows are excluded") {
    const auto e = small_experiment(5);
    auto o = quick_options();
    o.min_test_rows = 1000000;
    const auto report = run_experiment(e.bundle, e.windows, o);
    for (const auto& w : report.windows) CHECK(w.excluded);
    CHECK(report.forecasts.empty());
    CHECK_FALSE(report.spec(Specification::combined).pooled.r2.has_value());
}

TEST_CASE("period breakdown partitions the forecasts") {
    const auto e = small_experiment(6);
    const auto report = run_experiment(e.bundle, e.windows, quick_options());
    const std::vector<Period> periods{{"early", {2017, 1}, {2018, 4}}, {"late", {2019, 1}, {2019, 4}}};
    const auto rows = period_breakdown(report, periods);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].count + rows[1].count == report.forecasts.size());

    const std::vector<Period> all{{"all", {2017, 1}, {2019, 4}}};
    const auto whole = period_breakdown(report, all);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(whole[0].metrics[s]->r2 == report.specs[s].pooled.r2);
        CHECK(whole[0].metrics[s]->rmse == doctest::Approx(report.specs[s].pooled.rmse).epsilon(1e-14));
    }
    CHECK(*whole[0].improvement_pp == doctest::Approx(*report.improvement_pp).epsilon(1e-12));

    const std::vector<Period> with_empty{{"before", {2010, 1}, {2010, 4}}, {"all", {2017, 1}, {2019, 4}}};
    const auto empty_rows = period_breakdown(report, with_empty);
    CHECK(empty_rows[0].count == 0);
    CHECK_FALSE(empty_rows[0].metrics[0].has_value());
    CHECK_FALSE(empty_rows[0].improvement_pp.has_value());

    const std::vector<Period> overlap{{"a", {2017, 1}, {2018, 4}}, {"b", {2018, 4}, {2019, 4}}};
    CHECK_THROWS_AS((void)period_breakdown(report, overlap), ConfigError);
    const std::vector<Period> gap{{"a", {2017, 1}, {2018, 4}}};
    CHECK_THROWS_AS((void)period_breakdown(report, gap), ConfigError);
}

TEST_CASE("default periods") {
    const auto p = default_periods();
    REQUIRE(p.size() == 3);
    CHECK(p[0].first == Quarter{2017, 1});
    CHECK(p[0].last == Quarter{2019, 4});
    CHECK(p[1].first == Quarter{2020, 1});
    CHECK(p[1].last == Quarter{2021, 4});
    CHECK(p[2].first == Quarter{2022, 1});
    CHECK(p[2].last == Quarter{2024, 4});
}

TEST_CASE("evolution of constant graphs") {
    Rng rng(7);
    Matrix m(6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j && rng.uniform() < 0.6) m(i, j) = 5.0;
    std::vector<QuarterlyGraph> graphs;
    for (Quarter q{2017, 1}; q <= Quarter{2019, 4}; q = q.next()) graphs.emplace_back(q, m);
    const auto ev = evolution_summary(graphs);
    REQUIRE(ev.years.size() == 3);
    const auto f = extract_features(graphs[0]);
    for (const auto& y : ev.years) {
        CHECK(y.quarters == 4);
        CHECK(y.density == doctest::Approx(f.global.density).epsilon(1e-15));
        CHECK(y.edge_count == static_cast<double>(f.global.edge_count));
        CHECK(y.mean_clustering == doctest::Approx(f.global.mean_clustering).epsilon(1e-15));
    }
    REQUIRE(ev.change.has_value());
    CHECK(ev.change->density_pct == 0.0);
    CHECK(ev.change->edge_count_pct == 0.0);
    CHECK(ev.change->mean_clustering_pct == 0.0);
}

TEST_CASE("yearly density is the mean of quarterly densities") {
    const auto s = fixture::make_sample(fixture::small_config(10, {2018, 4}), 12);
    const auto ev = evolution_summary(s.snapshots);
    REQUIRE(ev.years.size() == 2);
    for (const auto& y : ev.years) {
        double sum = 0.0;
        int count = 0;
        for (const auto& snap : s.snapshots)
            if (snap.graph.quarter().year == y.year) {
                const double n = static_cast<double>(snap.graph.node_count());
                sum += static_cast<double>(snap.graph.edge_count()) / (n * (n - 1));
                ++count;
            }
        CHECK(y.density == doctest::Approx(sum / count).epsilon(1e-14));
    }
    double shares = 0.0;
    for (std::size_t k = 0; k < ev.shares.size(); ++k) {
        shares += ev.shares[k].share;
        if (k > 0) CHECK(ev.shares[k - 1].volume >= ev.shares[k].volume);
    }
    CHECK(shares == doctest::Approx(1.0));
}

TEST_CASE("change row and volume share arithmetic") {
    CHECK(*percent_change(0.689, 0.775) == doctest::Approx(12.4819).epsilon(1e-5));
    CHECK_FALSE(percent_change(0.0, 1.0).has_value());

    const auto ev = evolution_summary(evolution_case::density_years());
    REQUIRE(ev.years.size() == 2);
    CHECK(ev.years[0].density == doctest::Approx(0.689).epsilon(1e-12));
    CHECK(ev.years[1].density == doctest::Approx(0.775).epsilon(1e-12));
    CHECK(*ev.change->density_pct == doctest::Approx((0.775 - 0.689) / 0.689 * 100.0).epsilon(1e-9));
    CHECK(std::round(*ev.change->density_pct * 10.0) / 10.0 == 12.5);

    const auto vol = evolution_summary(evolution_case::volume_quarter());
    REQUIRE(!vol.shares.empty());
    CHECK(vol.shares[0].industry == 0);
    CHECK(vol.shares[0].volume == doctest::Approx(4.18e9).epsilon(1e-12));
    CHECK(vol.grand_total == doctest::Approx(22.1e9).epsilon(1e-12));
    CHECK(vol.shares[0].share == doctest::Approx(4.18 / 22.1).epsilon(1e-12));
    CHECK(std::round(vol.shares[0].share * 1000.0) / 10.0 == 18.9);
}
