#pragma once

#include "paynet/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace paynet {

/// One dated payment from a source industry to a destination industry.
struct PaymentRecord {
    YearMonth period;
    std::string source;
    std::string dest;
    Pence value = 0;  // > 0

    [[nodiscard]] double gbp() const { return pence_to_gbp(value); }
    bool operator==(const PaymentRecord&) const = default;
};

/// Ordered set of industry codes; position in the roster is the node index
/// used by every graph and feature table.
class IndustryRoster {
public:
    struct Entry {
        std::string code;
        std::string name;
        std::string category;  // used for snapshot colouring only
    };

    /// Throws ConfigError on duplicate/empty codes or fewer than two entries.
    explicit IndustryRoster(std::vector<Entry> entries);

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const Entry& operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view code) const;

    /// Roster CSV: header `code,name,category`; name/category may be empty.
    [[nodiscard]] static IndustryRoster read_csv(std::istream& in);
    void write_csv(std::ostream& out) const;

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct RejectedLine {
    std::size_t line = 0;  // 1-based line number in the stream
    std::string reason;
};

struct ParseOptions {
    /// Fixed roster; when empty the roster is inferred from the accepted
    /// records (codes sorted lexicographically).
    std::optional<IndustryRoster> roster;
    std::optional<YearMonth> first_month;
    std::optional<YearMonth> last_month;
};

struct ParseResult {
    std::vector<PaymentRecord> records;
    /// Empty only when inference found fewer than two distinct codes.
    std::optional<IndustryRoster> roster;
    std::vector<RejectedLine> rejects;
    std::size_t data_lines = 0;
};

/// Reads `date,source,dest,value` CSV. Lines starting with '#' before the
/// header are provenance comments and are skipped; blank lines are ignored.
/// A malformed header throws DataError; every other problem rejects the line.
[[nodiscard]] ParseResult parse_records(std::istream& in, const ParseOptions& options = {});

/// Summed payments for one quarter keyed by (source index, dest index).
struct PairTotals {
    Quarter quarter;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Pence> totals;

    [[nodiscard]] Pence grand_total() const;
};

struct AggregateOptions {
    bool keep_self_flows = false;
};

/// Buckets months into calendar quarters and sums values per ordered pair.
/// Quarters without records are absent from the result. Throws DataError for
/// codes missing from the roster.
[[nodiscard]] std::map<Quarter, PairTotals> aggregate_quarterly(std::span<const PaymentRecord> records,
                                                              const IndustryRoster& roster,
                                                              const AggregateOptions& options = {});

/// Contiguous sequence first..last, inserting empty totals for quarters with
/// no records. Quarters in `by_quarter` outside the range are ignored.
[[nodiscard]] std::vector<PairTotals> contiguous_quarters(const std::map<Quarter, PairTotals>& by_quarter,
                                                          Quarter first, Quarter last);

/// Fingerprint of an aggregated sample; embedded in report headers.
[[nodiscard]] std::uint64_t dataset_hash(std::span<const PairTotals> quarters);

/// Canonical CSV writer matching parse_records' input format. Optional
/// comment lines are emitted first, each prefixed with "# ".
void write_records_csv(std::ostream& out, std::span<const PaymentRecord> records,
                       std::span<const std::string> comments = {});

}  // namespace paynet
