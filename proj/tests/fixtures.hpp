#pragma once

// Small synthetic samples shared by the dataset, evaluation and CLI tests.

#include "paynet/dataset.hpp"
#include "paynet/ingestion.hpp"
#include "paynet/synth.hpp"

#include <vector>

namespace fixture {

struct Sample {
    paynet::SynthOutput data;
    std::vector<paynet::PairTotals> quarters;
    std::vector<paynet::QuarterSnapshot> snapshots;
    std::vector<paynet::GrowthObservation> growth;
};

inline paynet::SynthConfig small_config(int sectors = 12, paynet::Quarter last = {2019, 4}) {
    paynet::SynthConfig c;
    c.sectors = sectors;
    c.last = last;
    return c;
}

inline Sample make_sample(const paynet::SynthConfig& c, std::uint64_t seed) {
    Sample s{paynet::synth_generate(c, seed), {}, {}, {}};
    s.quarters = paynet::contiguous_quarters(paynet::aggregate_quarterly(s.data.records, s.data.roster), c.first, c.last);
    s.snapshots = paynet::build_snapshots(s.quarters, s.data.roster.size());
    s.growth = paynet::growth_rates(s.quarters);
    return s;
}

}  // namespace fixture
