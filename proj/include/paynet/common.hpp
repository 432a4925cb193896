#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace paynet {

/// Invalid configuration or arguments. Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed. Maps to CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Money in whole pence. Aggregation happens in this unit so that
/// summation is exact and independent of record order.
using Pence = std::int64_t;

[[nodiscard]] inline double pence_to_gbp(Pence p) { return static_cast<double>(p) / 100.0; }

/// Parses a decimal GBP amount ("1000.0", "12.345", "1e3") and rounds it to
/// the nearest penny. Returns nullopt for anything that is not a finite number.
[[nodiscard]] std::optional<Pence> parse_gbp(std::string_view text);

struct YearMonth {
    int year = 0;
    int month = 1;

    auto operator<=>(const YearMonth&) const = default;

    /// Accepts exactly `YYYY-MM` with month 01..12.
    [[nodiscard]] static std::optional<YearMonth> parse(std::string_view text);
    [[nodiscard]] std::string str() const;
};

struct Quarter {
    int year = 0;
    int q = 1;

    auto operator<=>(const Quarter&) const = default;

    [[nodiscard]] static Quarter of(YearMonth ym) { return {ym.year, (ym.month - 1) / 3 + 1}; }
    [[nodiscard]] Quarter next() const { return q == 4 ? Quarter{year + 1, 1} : Quarter{year, q + 1}; }
    [[nodiscard]] Quarter prev() const { return q == 1 ? Quarter{year - 1, 4} : Quarter{year, q - 1}; }
    [[nodiscard]] YearMonth first_month() const { return {year, (q - 1) * 3 + 1}; }
    [[nodiscard]] YearMonth last_month() const { return {year, q * 3}; }

    /// "2017Q1"
    [[nodiscard]] std::string str() const;
    /// Accepts `YYYYQn`; throws ConfigError otherwise.
    [[nodiscard]] static Quarter parse(std::string_view text);
};

/// Signed number of quarters from `from` to `to`.
[[nodiscard]] inline int quarters_between(Quarter from, Quarter to) {
    return (to.year - from.year) * 4 + (to.q - from.q);
}

/// 64-bit FNV-1a. Used for config/dataset/schema fingerprints, which must be
/// stable across platforms (std::hash is not).
class Fnv1a {
public:
    void update(std::string_view bytes);
    void update_u64(std::uint64_t v);
    void update_f64(double v);
    [[nodiscard]] std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

/// SplitMix64 finaliser over (seed, stream); derives independent per-tree /
/// per-component seeds from a run seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random source. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the variate transforms are written out here
/// because std::*_distribution output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1).
    [[nodiscard]] double uniform();
    /// Uniform integer in [0, bound). bound must be > 0.
    [[nodiscard]] std::uint64_t below(std::uint64_t bound);
    [[nodiscard]] double normal();
    [[nodiscard]] double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Runs f(i) for i in [0, n) on up to `jobs` threads (0 = hardware
/// concurrency). Each index is processed exactly once; callers write results
/// into pre-sized slots so output order never depends on scheduling.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& f);

}  // namespace paynet
