#pragma once

#include "paynet/common.hpp"
#include "paynet/ingestion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace paynet {

/// Synthetic payment-flow generator settings.
///
/// Log flow of pair (i, j) in quarter t is
///
///     mu_ij + lambda_ij(t) + season(t) + shocks_ij(t)
///     lambda_ij(t) = lambda_ij(t-1) + m_ij(t) + signal * x_ij(t-1)
///     m_ij(t)      = phi * m_ij(t-1) + growth_noise * eps
///
/// where mu_ij is a gravity term (log size_i + log size_j + pair noise),
/// phi is `persistence` (`shock_persistence` inside the shock window), and
/// x_ij(t-1) is read off the realised previous-quarter graph:
///
///     x_ij = (dc_out_i - rho) + (dc_in_j - rho)
///          + clustering_weight * ((cc_i - rho) + (cc_j - rho))
///
/// with dc the degree centrality (degree / (n-1)), cc the local clustering
/// coefficient and rho that graph's density. Edge presence is the top
/// `density` share of pair scores (pair propensity + per-quarter sector
/// activity + noise), so sector centralities move from quarter to quarter.
struct SynthConfig {
    int sectors = 89;
    Quarter first{2017, 1};
    Quarter last{2024, 4};
    double density = 0.70;
    Quarter shock_first{2020, 1};
    Quarter shock_last{2021, 4};
    double shock_density_drop = 0.02;

    double signal = 0.15;
    double clustering_weight = 0.5;
    double persistence = 0.8;
    double shock_persistence = 0.0;
    double growth_noise = 0.04;
    double level_shock = 0.01;
    double seasonal_amplitude = 0.02;

    double size_sigma = 1.2;
    double pair_sigma = 0.5;
    double activity = 0.5;
    double edge_noise = 0.3;
    double base_flow_gbp = 1.0e8;

    /// Throws ConfigError when the configuration is unusable.
    void validate() const;
    [[nodiscard]] bool in_shock(Quarter q) const { return shock_first <= q && q <= shock_last; }
    [[nodiscard]] std::size_t quarter_count() const;
};

struct SynthOutput {
    IndustryRoster roster;
    std::vector<PaymentRecord> records;
    /// Planted sector sizes (multiplicative gravity weights), by roster index.
    std::vector<double> sector_size;
};

/// Six sector groups used for snapshot colouring.
[[nodiscard]] const std::vector<std::string>& sector_categories();

/// Deterministic for a fixed (config, seed): records come out sorted by
/// month, then source index, then dest index, three monthly records per
/// active pair and quarter.
[[nodiscard]] SynthOutput synth_generate(const SynthConfig& config, std::uint64_t seed);

}  // namespace paynet
