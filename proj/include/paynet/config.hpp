#pragma once

#include "paynet/dataset.hpp"
#include "paynet/evaluate.hpp"
#include "paynet/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paynet {

/// Everything a run depends on besides the input data. Stored as JSON; see
/// configs/default.json for the committed defaults.
struct RunConfig {
    std::optional<std::string> input;   // records CSV; synthetic data when empty
    std::optional<std::string> roster;  // roster CSV; inferred from records when empty
    std::string output = "out";
    std::uint64_t seed = 7;
    std::size_t jobs = 0;  // 0 = all cores

    std::optional<Quarter> first;  // sample range; defaults to the data's range
    std::optional<Quarter> last;
    bool keep_self_flows = false;
    std::optional<double> clip = 5.0;

    SnapshotOptions snapshot{};
    DatasetOptions dataset{};
    ModelConfig model{};
    std::size_t min_train = 8;
    std::size_t min_test_rows = 30;
    std::optional<std::size_t> dm_hac_lag;
    std::vector<Period> periods = default_periods();
    std::size_t top_industries = 10;

    SynthConfig synth{};

    /// Throws ConfigError on unknown keys, wrong types or invalid values.
    [[nodiscard]] static RunConfig from_json_text(const std::string& text);
    [[nodiscard]] static RunConfig load(const std::string& path);
    [[nodiscard]] std::string to_json_text() const;

    /// Fingerprint of every setting that can change results; excludes seed,
    /// jobs and file paths.
    [[nodiscard]] std::uint64_t hash() const;

    void validate() const;
};

}  // namespace paynet
