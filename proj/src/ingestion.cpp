#include "paynet/ingestion.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

namespace paynet {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

std::string_view strip_bom(std::string_view s) {
    if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
        static_cast<unsigned char>(s[2]) == 0xBF)
        s.remove_prefix(3);
    return s;
}

}  // namespace

IndustryRoster::IndustryRoster(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2)
        throw ConfigError("industry roster needs at least 2 sectors, got " + std::to_string(entries_.size()));
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& code = entries_[i].code;
        if (code.empty()) throw ConfigError("industry roster contains an empty code");
        if (!index_.emplace(code, i).second) throw ConfigError("duplicate industry code '" + code + "'");
    }
}

std::optional<std::size_t> IndustryRoster::index_of(std::string_view code) const {
    auto it = index_.find(std::string(code));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

IndustryRoster IndustryRoster::read_csv(std::istream& in) {
    std::string line;
    bool header_seen = false;
    std::vector<Entry> entries;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line_no == 1 ? strip_bom(line) : std::string_view(line));
        if (view.empty() || view.front() == '#') continue;
        auto fields = split_commas(view);
        if (!header_seen) {
            if (fields.empty() || fields[0] != "code")
                throw ConfigError("roster CSV header must start with 'code'");
            header_seen = true;
            continue;
        }
        if (fields.size() > 3)
            throw ConfigError("roster CSV line " + std::to_string(line_no) + ": too many fields");
        Entry e;
        e.code = std::string(fields[0]);
        e.name = fields.size() > 1 ? std::string(fields[1]) : e.code;
        e.category = fields.size() > 2 ? std::string(fields[2]) : std::string();
        entries.push_back(std::move(e));
    }
    if (!header_seen) throw ConfigError("roster CSV is empty");
    return IndustryRoster(std::move(entries));
}

void IndustryRoster::write_csv(std::ostream& out) const {
    out << "code,name,category\n";
    for (const auto& e : entries_) out << e.code << ',' << e.name << ',' << e.category << '\n';
}

ParseResult parse_records(std::istream& in, const ParseOptions& options) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line_no == 1 ? strip_bom(line) : std::string_view(line));
        if (!header_seen) {
            if (view.empty() || view.front() == '#') continue;
            if (view != "date,source,dest,value")
                throw DataError("malformed header on line " + std::to_string(line_no) +
                                ": expected 'date,source,dest,value'");
            header_seen = true;
            continue;
        }
        if (view.empty()) continue;
        ++result.data_lines;

        auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };
        const auto fields = split_commas(view);
        if (fields.size() != 4) {
            reject("expected 4 fields, got " + std::to_string(fields.size()));
            continue;
        }
        const auto period = YearMonth::parse(fields[0]);
        if (!period) {
            reject("unparseable date '" + std::string(fields[0]) + "'");
            continue;
        }
        if ((options.first_month && *period < *options.first_month) ||
            (options.last_month && *period > *options.last_month)) {
            reject("period " + period->str() + " outside sample range");
            continue;
        }
        if (fields[1].empty() || fields[2].empty()) {
            reject("empty industry code");
            continue;
        }
        const auto value = parse_gbp(fields[3]);
        if (!value) {
            reject("non-numeric value '" + std::string(fields[3]) + "'");
            continue;
        }
        if (*value <= 0) {
            reject("non-positive value");
            continue;
        }
        if (options.roster) {
            if (!options.roster->index_of(fields[1])) {
                reject("unknown industry '" + std::string(fields[1]) + "'");
                continue;
            }
            if (!options.roster->index_of(fields[2])) {
                reject("unknown industry '" + std::string(fields[2]) + "'");
                continue;
            }
        }
        result.records.push_back({*period, std::string(fields[1]), std::string(fields[2]), *value});
    }
    if (!header_seen) throw DataError("malformed header: stream has no 'date,source,dest,value' header");

    if (options.roster) {
        result.roster = options.roster;
    } else {
        std::set<std::string> codes;
        for (const auto& r : result.records) {
            codes.insert(r.source);
            codes.insert(r.dest);
        }
        if (codes.size() >= 2) {
            std::vector<IndustryRoster::Entry> entries;
            for (const auto& c : codes) entries.push_back({c, c, ""});
            result.roster.emplace(std::move(entries));
        }
    }
    return result;
}

Pence PairTotals::grand_total() const {
    Pence sum = 0;
    for (const auto& [key, v] : totals) sum += v;
    return sum;
}

std::map<Quarter, PairTotals> aggregate_quarterly(std::span<const PaymentRecord> records, const IndustryRoster& roster,
                                                  const AggregateOptions& options) {
    std::map<Quarter, PairTotals> out;
    for (const auto& r : records) {
        const auto src = roster.index_of(r.source);
        const auto dst = roster.index_of(r.dest);
        if (!src || !dst)
            throw DataError("record references industry missing from roster: " + r.source + " -> " + r.dest);
        if (*src == *dst && !options.keep_self_flows) continue;
        const Quarter q = Quarter::of(r.period);
        auto& slot = out[q];
        slot.quarter = q;
        slot.totals[{static_cast<std::uint32_t>(*src), static_cast<std::uint32_t>(*dst)}] += r.value;
    }
    return out;
}

std::vector<PairTotals> contiguous_quarters(const std::map<Quarter, PairTotals>& by_quarter, Quarter first,
                                            Quarter last) {
    if (last < first) throw ConfigError("quarter range is empty: " + first.str() + " > " + last.str());
    std::vector<PairTotals> out;
    for (Quarter q = first; q <= last; q = q.next()) {
        auto it = by_quarter.find(q);
        if (it != by_quarter.end()) {
            out.push_back(it->second);
        } else {
            PairTotals empty;
            empty.quarter = q;
            out.push_back(std::move(empty));
        }
    }
    return out;
}

std::uint64_t dataset_hash(std::span<const PairTotals> quarters) {
    Fnv1a h;
    for (const auto& pt : quarters) {
        h.update_u64(static_cast<std::uint64_t>(pt.quarter.year * 4 + pt.quarter.q));
        h.update_u64(pt.totals.size());
        for (const auto& [key, v] : pt.totals) {
            h.update_u64(key.first);
            h.update_u64(key.second);
            h.update_u64(static_cast<std::uint64_t>(v));
        }
    }
    return h.digest();
}

void write_records_csv(std::ostream& out, std::span<const PaymentRecord> records, std::span<const std::string> comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "date,source,dest,value\n";
    char buf[48];
    for (const auto& r : records) {
        const Pence whole = r.value / 100;
        const Pence frac = r.value % 100;
        std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(whole), static_cast<long long>(frac));
        out << r.period.str() << ',' << r.source << ',' << r.dest << ',' << buf << '\n';
    }
}

}  // namespace paynet
