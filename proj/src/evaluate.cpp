#include "paynet/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace paynet {

namespace {

std::size_t slot(Specification s) {
    switch (s) {
        case Specification::traditional: return 0;
        case Specification::network: return 1;
        case Specification::combined: break;
    }
    return 2;
}

std::optional<double> sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return std::nullopt;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::array<std::optional<MetricSet>, 3> pooled_metrics(std::span<const ForecastRecord* const> rows) {
    std::array<std::optional<MetricSet>, 3> out;
    if (rows.size() < 2) return out;
    std::vector<double> target, pred;
    target.reserve(rows.size());
    pred.reserve(rows.size());
    for (const auto* r : rows) target.push_back(r->target);
    for (std::size_t s = 0; s < 3; ++s) {
        pred.clear();
        for (const auto* r : rows) pred.push_back(r->prediction[s]);
        out[s] = evaluate_metrics(pred, target);
    }
    return out;
}

std::optional<double> improvement(const std::array<std::optional<MetricSet>, 3>& m) {
    if (!m[0] || !m[2] || !m[0]->r2 || !m[2]->r2) return std::nullopt;
    return (*m[2]->r2 - *m[0]->r2) * 100.0;
}

}  // namespace

double ForecastRecord::error(Specification spec) const { return target - prediction[slot(spec)]; }

const SpecSummary& EvaluationReport::spec(Specification s) const { return specs[slot(s)]; }

EvaluationReport run_experiment(const DatasetBundle& bundle, std::span<const WindowSplit> windows,
                                const ExperimentOptions& options) {
    for (Specification s : kSpecifications) {
        const auto& d = bundle.get(s);
        if (d.keys != bundle.combined.keys || d.targets != bundle.combined.targets)
            throw DataError("experiment: specifications do not share row keys");
    }
    for (std::size_t w = 1; w < windows.size(); ++w)
        if (windows[w].test <= windows[w - 1].test) throw ConfigError("experiment: windows must be increasing");
    for (const auto& w : windows)
        if (w.train_last >= w.test) throw ConfigError("experiment: window trains on its test quarter");

    const auto& base = bundle.combined;
    EvaluationReport report;
    report.windows.resize(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        auto& wr = report.windows[w];
        wr.split = windows[w];
        wr.test_quarter = Quarter{base.first_quarter.year, base.first_quarter.q};
        for (std::size_t k = 1; k < windows[w].test; ++k) wr.test_quarter = wr.test_quarter.next();
        wr.train_rows = base.rows_through(windows[w].train_last);
        wr.test_rows = base.rows_at(windows[w].test).second;
        wr.excluded = wr.test_rows < std::max<std::size_t>(options.min_test_rows, 2) || wr.train_rows == 0;
    }

    // predictions[w][s] for every window and specification
    std::vector<std::array<std::vector<double>, 3>> predictions(windows.size());
    parallel_for(windows.size() * 3, options.jobs, [&](std::size_t job) {
        const std::size_t w = job / 3;
        const std::size_t s = job % 3;
        const auto& wr = report.windows[w];
        if (wr.excluded) return;
        const auto& data = bundle.get(kSpecifications[s]);
        const FeatureMatrix all = data.matrix();
        const FeatureMatrix train = all.slice(0, wr.train_rows);
        const auto [first, count] = data.rows_at(wr.split.test);
        const FeatureMatrix test = all.slice(first, count);
        const std::span<const double> y(data.targets.data(), wr.train_rows);
        const std::uint64_t seed = derive_seed(options.seed, wr.split.test);
        EnsembleModel model;
        if (options.model.kind == ModelKind::forest) {
            ForestParams p = options.model.forest;
            p.seed = seed;
            model = fit_forest(train, y, p, 1);
        } else {
            BoostParams p = options.model.boost;
            p.seed = seed;
            model = fit_boosted(train, y, p);
        }
        predictions[w][s] = model.predict(test);
    });

    std::array<std::vector<double>, 3> window_r2;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        auto& wr = report.windows[w];
        if (wr.excluded) continue;
        const auto [first, count] = base.rows_at(wr.split.test);
        const std::span<const double> target(base.targets.data() + first, count);
        for (std::size_t s = 0; s < 3; ++s) {
            wr.metrics[s] = evaluate_metrics(predictions[w][s], target);
            if (wr.metrics[s]->r2) window_r2[s].push_back(*wr.metrics[s]->r2);
        }
        for (std::size_t r = 0; r < count; ++r) {
            ForecastRecord rec;
            rec.key = base.keys[first + r];
            rec.target = target[r];
            for (std::size_t s = 0; s < 3; ++s) rec.prediction[s] = predictions[w][s][r];
            report.forecasts.push_back(rec);
        }
    }

    std::vector<const ForecastRecord*> all;
    for (const auto& f : report.forecasts) all.push_back(&f);
    const auto pooled = pooled_metrics(all);
    for (std::size_t s = 0; s < 3; ++s) {
        auto& summary = report.specs[s];
        summary.spec = kSpecifications[s];
        if (pooled[s]) summary.pooled = *pooled[s];
        summary.r2_sd = sample_sd(window_r2[s]);
        summary.windows = window_r2[s].size();
    }
    report.improvement_pp = improvement(pooled);

    if (report.forecasts.size() >= 8) {
        std::vector<double> e1, e2;
        for (const auto& f : report.forecasts) {
            e1.push_back(f.error(Specification::traditional));
            e2.push_back(f.error(Specification::combined));
        }
        try {
            report.dm = diebold_mariano(e1, e2);
        } catch (const DataError&) {
            report.dm.reset();  // degenerate differential; reported as missing
        }
    }
    return report;
}

std::vector<double> loss_differential(std::span<const double> errors1, std::span<const double> errors2) {
    if (errors1.size() != errors2.size()) throw DataError("dm: error series differ in length");
    std::vector<double> d(errors1.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        if (!std::isfinite(errors1[t]) || !std::isfinite(errors2[t])) throw DataError("dm: non-finite error");
        d[t] = errors1[t] * errors1[t] - errors2[t] * errors2[t];
    }
    return d;
}

DmResult diebold_mariano_differential(std::span<const double> d, std::optional<std::size_t> hac_lag) {
    const std::size_t n = d.size();
    if (n < 2) throw DataError("dm: need at least 2 loss differentials");
    for (double v : d)
        if (!std::isfinite(v)) throw DataError("dm: non-finite loss differential");
    const auto T = static_cast<double>(n);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= T;

    double variance = 0.0;
    if (!hac_lag) {
        double ss = 0.0;
        for (double v : d) ss += (v - mean) * (v - mean);
        variance = ss / (T - 1.0) / T;
    } else {
        const std::size_t lag = std::min(*hac_lag, n - 1);
        auto autocov = [&](std::size_t k) {
            double s = 0.0;
            for (std::size_t t = k; t < n; ++t) s += (d[t] - mean) * (d[t - k] - mean);
            return s / T;
        };
        double lrv = autocov(0);
        for (std::size_t k = 1; k <= lag; ++k)
            lrv += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(lag + 1)) * autocov(k);
        variance = std::max(lrv, 0.0) / T;
    }

    DmResult r;
    r.count = n;
    r.mean_differential = mean;
    r.variance_of_mean = variance;
    r.hac_lag = hac_lag;
    if (!(variance > 0.0)) {
        if (mean == 0.0) {
            r.status = DmStatus::indistinguishable;
            r.statistic = 0.0;
            r.p_value = 1.0;
            return r;
        }
        throw DataError("dm: loss differential has zero variance but nonzero mean");
    }
    r.statistic = mean / std::sqrt(variance);
    r.p_value = std::erfc(std::fabs(r.statistic) / std::sqrt(2.0));
    return r;
}

DmResult diebold_mariano(std::span<const double> errors1, std::span<const double> errors2,
                         std::optional<std::size_t> hac_lag) {
    if (errors1.size() != errors2.size()) throw DataError("dm: error series differ in length");
    if (errors1.size() < 8) throw DataError("dm: need at least 8 paired errors");
    const auto d = loss_differential(errors1, errors2);
    return diebold_mariano_differential(d, hac_lag);
}

std::vector<Period> default_periods() {
    return {
        {"Pre-Pandemic", {2017, 1}, {2019, 4}},
        {"Pandemic", {2020, 1}, {2021, 4}},
        {"Recovery", {2022, 1}, {2024, 4}},
    };
}

std::vector<PeriodRow> period_breakdown(const EvaluationReport& report, std::span<const Period> periods) {
    for (std::size_t a = 0; a < periods.size(); ++a) {
        if (periods[a].last < periods[a].first) throw ConfigError("periods: '" + periods[a].name + "' is empty");
        for (std::size_t b = a + 1; b < periods.size(); ++b)
            if (!(periods[a].last < periods[b].first || periods[b].last < periods[a].first))
                throw ConfigError("periods: '" + periods[a].name + "' overlaps '" + periods[b].name + "'");
    }
    std::vector<std::vector<const ForecastRecord*>> members(periods.size());
    for (const auto& f : report.forecasts) {
        bool placed = false;
        for (std::size_t p = 0; p < periods.size() && !placed; ++p)
            if (periods[p].first <= f.key.quarter && f.key.quarter <= periods[p].last) {
                members[p].push_back(&f);
                placed = true;
            }
        if (!placed) throw ConfigError("periods: test quarter " + f.key.quarter.str() + " is not in any period");
    }
    std::vector<PeriodRow> rows;
    for (std::size_t p = 0; p < periods.size(); ++p) {
        PeriodRow row;
        row.period = periods[p];
        row.count = members[p].size();
        row.metrics = pooled_metrics(members[p]);
        row.improvement_pp = improvement(row.metrics);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> percent_change(double first, double last) {
    if (first == 0.0) return std::nullopt;
    return (last - first) / first * 100.0;
}

EvolutionSummary evolution_summary(std::span<const QuarterSnapshot> snapshots) {
    EvolutionSummary out;
    if (snapshots.empty()) return out;
    const std::size_t n = snapshots.front().graph.node_count();

    struct Acc {
        std::size_t quarters = 0, path_quarters = 0;
        double density = 0, edges = 0, path = 0, clustering = 0;
    };
    std::map<int, Acc> by_year;
    std::vector<double> volume(n, 0.0);
    for (const auto& s : snapshots) {
        if (s.graph.node_count() != n) throw DataError("evolution: graphs differ in size");
        const auto& g = s.features.global;
        auto& a = by_year[s.graph.quarter().year];
        ++a.quarters;
        a.density += g.density;
        a.edges += static_cast<double>(g.edge_count);
        a.clustering += g.mean_clustering;
        if (g.avg_path_length) {
            ++a.path_quarters;
            a.path += *g.avg_path_length;
        }
        for (std::size_t i = 0; i < n; ++i)
            volume[i] += (s.features.nodes.in_strength[i] + s.features.nodes.out_strength[i]) / 2.0;
    }
    for (const auto& [year, a] : by_year) {
        YearStats y;
        y.year = year;
        y.quarters = a.quarters;
        const auto q = static_cast<double>(a.quarters);
        y.density = a.density / q;
        y.edge_count = a.edges / q;
        y.mean_clustering = a.clustering / q;
        if (a.path_quarters > 0) y.avg_path_length = a.path / static_cast<double>(a.path_quarters);
        out.years.push_back(y);
    }
    if (out.years.size() >= 2) {
        const auto& f = out.years.front();
        const auto& l = out.years.back();
        ChangeRow c;
        c.first_year = f.year;
        c.last_year = l.year;
        c.density_pct = percent_change(f.density, l.density);
        c.edge_count_pct = percent_change(f.edge_count, l.edge_count);
        if (f.avg_path_length && l.avg_path_length)
            c.avg_path_length_pct = percent_change(*f.avg_path_length, *l.avg_path_length);
        c.mean_clustering_pct = percent_change(f.mean_clustering, l.mean_clustering);
        out.change = c;
    }
    out.grand_total = ordered_sum(volume);
    for (std::size_t i = 0; i < n; ++i)
        out.shares.push_back({i, volume[i], out.grand_total > 0.0 ? volume[i] / out.grand_total : 0.0});
    std::stable_sort(out.shares.begin(), out.shares.end(),
                     [](const VolumeShare& a, const VolumeShare& b) { return a.volume > b.volume; });
    return out;
}

EvolutionSummary evolution_summary(std::span<const QuarterlyGraph> graphs) {
    std::vector<QuarterSnapshot> snapshots;
    snapshots.reserve(graphs.size());
    for (const auto& g : graphs) snapshots.push_back({g, extract_features(g), Matrix()});
    return evolution_summary(snapshots);
}

}  // namespace paynet
