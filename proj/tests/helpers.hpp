#pragma once

#include <algorithm>
#include <vector>

#include "poolseq/simulator.hpp"

namespace testutil {

inline poolseq::Population make_population(std::vector<double> positions, std::vector<std::vector<std::int8_t>> rows)
{
    poolseq::Population pop;
    pop.snp_positions = std::move(positions);
    pop.M = static_cast<int>(rows.size());
    for (auto& r : rows) pop.alleles.insert(pop.alleles.end(), r.begin(), r.end());
    return pop;
}

// Reads at the given starts for each individual, carrying the true alleles.
inline poolseq::ReadSet make_reads(const poolseq::Population& pop, double G, double L,
                                   const std::vector<std::vector<double>>& starts)
{
    using namespace poolseq;
    ReadSet rs;
    rs.config.genome_length_G = G;
    rs.config.read_length_L = L;
    rs.config.num_individuals_M = pop.M;
    rs.num_snps = pop.num_snps();
    const auto& pos = pop.snp_positions;
    for (int m = 0; m < pop.M; ++m)
        for (double s : starts[static_cast<std::size_t>(m)]) {
            ReadRecord r;
            r.start = s;
            r.hidden_individual = m;
            auto a = std::lower_bound(pos.begin(), pos.end(), s) - pos.begin();
            auto b = std::lower_bound(pos.begin(), pos.end(), s + L) - pos.begin();
            r.first_snp = static_cast<std::uint32_t>(a);
            r.n_snps = static_cast<std::uint32_t>(b - a);
            rs.reads.push_back(r);
        }
    std::stable_sort(rs.reads.begin(), rs.reads.end(), [](const ReadRecord& x, const ReadRecord& y) {
        return x.start != y.start ? x.start < y.start : x.hidden_individual < y.hidden_individual;
    });
    for (auto& r : rs.reads) {
        r.allele_offset = rs.allele_buffer.size();
        const std::int8_t* src = pop.row(r.hidden_individual) + r.first_snp;
        rs.allele_buffer.insert(rs.allele_buffer.end(), src, src + r.n_snps);
    }
    return rs;
}

}  // namespace testutil
