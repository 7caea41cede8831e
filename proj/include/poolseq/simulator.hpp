#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "poolseq/model.hpp"

namespace poolseq {

enum class Alphabet { biallelic, quaternary };

struct Population {
    std::vector<double> snp_positions;
    // Row-major M x S.
    std::vector<std::int8_t> alleles;
    int M = 0;
    Alphabet alphabet = Alphabet::biallelic;
    AlleleLaw law;

    std::size_t num_snps() const { return snp_positions.size(); }
    std::int8_t allele(int m, std::size_t s) const { return alleles[static_cast<std::size_t>(m) * num_snps() + s]; }
    const std::int8_t* row(int m) const { return alleles.data() + static_cast<std::size_t>(m) * num_snps(); }
};

// Covered SNPs are always the contiguous index range [first_snp, first_snp + n_snps).
struct ReadRecord {
    double start = 0.0;
    int hidden_individual = 0;
    std::uint32_t first_snp = 0;
    std::uint32_t n_snps = 0;
    std::uint64_t allele_offset = 0;
};

struct ReadSet {
    std::vector<ReadRecord> reads;
    std::vector<std::int8_t> allele_buffer;
    ModelConfig config;
    std::size_t num_snps = 0;
    bool noisy = false;

    std::size_t size() const { return reads.size(); }
    std::span<const std::int8_t> observed(std::size_t i) const
    {
        const auto& r = reads[i];
        return {allele_buffer.data() + r.allele_offset, r.n_snps};
    }
    double end(std::size_t i) const { return reads[i].start + config.read_length_L; }
};

Population generate_population(const ModelConfig& config, RandomStream& stream);
ReadSet generate_reads(const Population& pop, const ModelConfig& config, RandomStream& stream);
ReadSet apply_noise(ReadSet rs, double eps, RandomStream& stream);

std::vector<std::size_t> discriminating_indices(const Population& pop, int i, int j);
std::vector<double> discriminating_positions(const Population& pop, int i, int j);

// Rough resident size of one simulated trial, for the desk-scale guard.
double estimated_trial_bytes(const ModelConfig& config);

// Debug dump; not a stable format.
void dump_text(std::ostream& os, const Population& pop, const ReadSet& rs);

}  // namespace poolseq
