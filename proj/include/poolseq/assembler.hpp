#pragma once

#include <climits>
#include <cstdint>
#include <vector>

#include "poolseq/simulator.hpp"

namespace poolseq {

inline constexpr std::int8_t kUnknown = INT8_MIN;

struct CoverageViolation {
    int individual = 0;
    std::size_t snp = 0;
};

struct BridgingViolation {
    int individual_i = 0;
    int individual_j = 0;
    double region_start = 0.0;
    double region_end = 0.0;
};

struct ConditionReport {
    bool coverage_ok = true;
    std::vector<CoverageViolation> coverage_violations;
    bool bridging_ok = true;
    std::vector<BridgingViolation> bridging_violations;

    bool ok() const { return coverage_ok && bridging_ok; }
};

ConditionReport check_coverage(const Population& pop, const ReadSet& rs);
// Regions before the first and after the last discriminating SNP of a pair are exempt.
ConditionReport check_bridging(const Population& pop, const ReadSet& rs);
ConditionReport check_conditions(const Population& pop, const ReadSet& rs);

struct Contig {
    std::vector<std::uint32_t> assigned_reads;
    // Dense over all SNP indices; kUnknown where nothing is known.
    std::vector<std::int8_t> consensus;

    bool complete() const;
};

struct AssemblyResult {
    std::vector<Contig> contigs;
    std::size_t inconsistent_merges = 0;
    std::size_t random_ties = 0;
    std::size_t filled_after_pass = 0;
};

AssemblyResult greedy_assemble(const ReadSet& rs, int M, RandomStream& stream);

bool score_assembly(const std::vector<Contig>& contigs, const Population& pop, const ReadSet& rs);

struct UniquenessResult {
    bool exhausted = false;  // state cap hit; other fields meaningless
    std::size_t assemblies = 0;
    bool contains_truth = false;
    bool unique_and_correct() const { return !exhausted && assemblies == 1 && contains_truth; }
};

// Exhaustive search over read-to-genome labelings for small instances. An assembly
// is a multiset of M complete sequences such that every read matches the sequence
// it is assigned to and every position of every sequence is seen by some read.
UniquenessResult enumerate_assemblies(const ReadSet& rs, const Population& truth, std::size_t state_cap = 200000);

}  // namespace poolseq
