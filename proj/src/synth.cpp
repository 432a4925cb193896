#include "paynet/synth.hpp"

#include "paynet/features.hpp"
#include "paynet/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace paynet {

const std::vector<std::string>& sector_categories() {
    static const std::vector<std::string> categories{
        "Financial & Business", "Manufacturing",      "Trade & Distribution",
        "Public & Social",      "Primary Industries", "Other Services",
    };
    return categories;
}

void SynthConfig::validate() const {
    if (sectors < 2) throw ConfigError("synth: sectors must be >= 2, got " + std::to_string(sectors));
    if (last < first) throw ConfigError("synth: empty quarter range " + first.str() + ".." + last.str());
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("synth: density must lie in (0, 1]");
    if (!(shock_density_drop >= 0.0 && shock_density_drop < density))
        throw ConfigError("synth: shock_density_drop must lie in [0, density)");
    if (!(std::fabs(persistence) < 1.0) || !(std::fabs(shock_persistence) < 1.0))
        throw ConfigError("synth: persistence coefficients must lie in (-1, 1)");
    for (double v : {growth_noise, level_shock, seasonal_amplitude, size_sigma, pair_sigma, activity, edge_noise})
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("synth: noise scales must be finite and >= 0");
    if (!std::isfinite(signal) || !std::isfinite(clustering_weight))
        throw ConfigError("synth: signal coefficients must be finite");
    if (!(base_flow_gbp > 0.0)) throw ConfigError("synth: base_flow_gbp must be > 0");
}

std::size_t SynthConfig::quarter_count() const {
    return static_cast<std::size_t>(quarters_between(first, last) + 1);
}

namespace {

std::vector<double> double_centered_normals(Rng& rng, std::size_t n) {
    std::vector<double> u(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) u[i * n + j] = rng.normal();
    // remove sector-level means so no sector is persistently more connected
    std::vector<double> row(n, 0.0), col(n, 0.0);
    double grand = 0.0;
    const double cells = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            row[i] += u[i * n + j] / cells;
            col[j] += u[i * n + j] / cells;
            grand += u[i * n + j] / (cells * static_cast<double>(n));
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) u[i * n + j] += grand - row[i] - col[j];
    return u;
}

std::vector<char> top_share(const std::vector<double>& score, std::size_t n, std::size_t keep) {
    std::vector<std::size_t> cells;
    cells.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) cells.push_back(i * n + j);
    keep = std::min(keep, cells.size());
    auto better = [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    };
    if (keep < cells.size())
        std::nth_element(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep), cells.end(), better);
    std::vector<char> present(n * n, 0);
    for (std::size_t k = 0; k < keep; ++k) present[cells[k]] = 1;
    return present;
}

}  // namespace

SynthOutput synth_generate(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    const auto n = static_cast<std::size_t>(config.sectors);
    const std::size_t quarters = config.quarter_count();
    const std::size_t cells = n * n;
    const std::size_t possible = n * (n - 1);

    std::vector<IndustryRoster::Entry> entries;
    const int width = n >= 100 ? 3 : 2;
    for (std::size_t i = 0; i < n; ++i) {
        char code[32];
        std::snprintf(code, sizeof code, "S%0*zu", width, i + 1);
        entries.push_back({code, std::string("Sector ") + (code + 1),
                           sector_categories()[i % sector_categories().size()]});
    }

    Rng size_rng(derive_seed(seed, 1));
    std::vector<double> log_size(n);
    std::vector<double> sector_size(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_size[i] = config.size_sigma * size_rng.normal();
        sector_size[i] = std::exp(log_size[i]);
    }

    Rng pair_rng(derive_seed(seed, 2));
    const std::vector<double> propensity = double_centered_normals(pair_rng, n);
    std::vector<double> base_level(cells, 0.0);
    std::vector<double> momentum(cells, 0.0);
    const double stationary_sd = config.growth_noise / std::sqrt(1.0 - config.persistence * config.persistence);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            base_level[i * n + j] =
                std::log(config.base_flow_gbp) + log_size[i] + log_size[j] + config.pair_sigma * pair_rng.normal();
            momentum[i * n + j] = stationary_sd * pair_rng.normal();
        }

    const double season[4] = {0.0, config.seasonal_amplitude, 0.0, -config.seasonal_amplitude};
    std::vector<double> integrated(cells, 0.0);  // lambda
    std::vector<double> shocks(cells, 0.0);
    std::vector<double> planted(cells, 0.0);     // signal * x(t-1)
    std::vector<double> score(cells, 0.0);
    std::vector<double> act_out(n), act_in(n), eta_out(n), eta_in(n);

    SynthOutput out{IndustryRoster(std::move(entries)), {}, std::move(sector_size)};
    const auto& roster = out.roster;

    Quarter q = config.first;
    for (std::size_t t = 0; t < quarters; ++t, q = q.next()) {
        Rng rng(derive_seed(seed, 1000 + t));
        const bool shock = config.in_shock(q);

        for (std::size_t i = 0; i < n; ++i) {
            act_out[i] = rng.normal();
            act_in[i] = rng.normal();
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    score[i * n + j] = propensity[i * n + j] + config.activity * (act_out[i] + act_in[j]) +
                                       config.edge_noise * rng.normal();
        const double target_density = config.density - (shock ? config.shock_density_drop : 0.0);
        const auto keep = static_cast<std::size_t>(std::llround(target_density * static_cast<double>(possible)));
        const auto present = top_share(score, n, keep);

        if (t > 0) {
            const double phi = shock ? config.shock_persistence : config.persistence;
            if (shock) {
                for (std::size_t i = 0; i < n; ++i) {
                    eta_out[i] = rng.normal();
                    eta_in[i] = rng.normal();
                }
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const std::size_t c = i * n + j;
                    momentum[c] = phi * momentum[c] + config.growth_noise * rng.normal();
                    integrated[c] += momentum[c] + planted[c];
                    if (shock) shocks[c] += config.level_shock * (eta_out[i] + eta_in[j]);
                }
        }

        // monthly records for this quarter
        std::vector<std::array<double, 3>> shares(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            if (!present[c]) continue;
            double total = 0.0;
            for (auto& s : shares[c]) total += (s = 1.0 + 0.25 * rng.uniform());
            for (auto& s : shares[c]) s /= total;
        }
        const YearMonth first_month = q.first_month();
        for (int m = 0; m < 3; ++m) {
            const YearMonth ym{first_month.year, first_month.month + m};
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t c = i * n + j;
                    if (!present[c]) continue;
                    const double log_flow = base_level[c] + integrated[c] + season[q.q - 1] + shocks[c];
                    const double pence = std::exp(log_flow) * shares[c][static_cast<std::size_t>(m)] * 100.0;
                    out.records.push_back({ym, roster[i].code, roster[j].code,
                                           std::max<Pence>(1, static_cast<Pence>(std::llround(pence)))});
                }
        }

        // network position this quarter feeds next quarter's growth
        Matrix topology(n);
        for (std::size_t c = 0; c < cells; ++c)
            if (present[c]) topology(c / n, c % n) = 1.0;
        const QuarterlyGraph graph(q, std::move(topology));
        const auto degrees = degree_centrality(graph);
        const auto clustering = clustering_coefficient(graph);
        const double rho = network_density(graph);
        const double scale = static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double x = (degrees.out[i] / scale - rho) + (degrees.in[j] / scale - rho) +
                                 config.clustering_weight * ((clustering[i] - rho) + (clustering[j] - rho));
                planted[i * n + j] = config.signal * x;
            }
    }
    return out;
}

}  // namespace paynet
