#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "poolseq/assembler.hpp"
#include "poolseq/denoiser.hpp"
#include "poolseq/noisy_bounds.hpp"

namespace poolseq {

enum class DenoiseMethod { automatic, ml, spectral };

struct NoisyAssemblyOptions {
    SegmentationPlan plan;
    DenoiseMethod method = DenoiseMethod::automatic;
    // automatic uses ML while C(2^kappa, M) stays below this.
    double ml_hypothesis_cap = 2e4;
    SpectralOptions spectral;
};

struct NoisyAssemblyResult {
    // Row-major M x S; kUnknown where nothing was recovered.
    std::vector<std::int8_t> sequences;
    std::size_t blocks = 0;
    std::size_t empty_blocks = 0;
    std::size_t starved_blocks = 0;     // fewer covering reads than M
    std::size_t ambiguous_stitches = 0; // zero or several consistent matchings
    std::size_t ml_blocks = 0;
    std::size_t spectral_blocks = 0;
    bool complete = false;
};

// Reads fully containing [window_start, window_end) restricted to SNPs in
// [first_snp, first_snp + kappa). Alleles in the ReadSet must be biallelic.
DenoiseBlock extract_block(const ReadSet& rs, std::size_t first_snp, int kappa, double window_start,
                           double window_end);

// Denoise overlapping windows of length D stepped by d and stitch consecutive
// blocks by matching their sequences on the shared SNPs. SNP loci are public
// (reads are mapped to the reference); only the alleles are hidden.
NoisyAssemblyResult noisy_assemble(const ReadSet& rs, const std::vector<double>& snp_positions, int M,
                                   const NoisyAssemblyOptions& options, RandomStream& stream);

bool score_sequences(const std::vector<std::int8_t>& sequences, const Population& pop);

struct TrialOutcome {
    std::uint64_t trial = 0;
    std::size_t num_snps = 0;
    std::size_t num_reads = 0;
    bool coverage_fail = false;
    bool bridging_fail = false;
    bool greedy_fail = false;
    bool denoise_fail = false;
    bool failure = false;
};

struct TrialOptions {
    std::optional<SegmentationPlan> plan;
    DenoiseMethod method = DenoiseMethod::automatic;
    double ml_hypothesis_cap = 2e4;
    NuMinMode nu_mode = NuMinMode::worst_case;
};

// One full simulated trial. Noiseless runs go through the greedy assembler;
// noisy runs through denoise and stitch. Streams derive from (seed, trial).
TrialOutcome run_trial(const ModelConfig& config, std::uint64_t seed, std::uint64_t trial,
                       const TrialOptions& options = {});

// A block drawn straight from the observation model: M distinct truths with
// entries +1 at rate minor_frequency, n rows each from a uniform individual,
// every entry flipped with probability eps.
struct PlantedBlock {
    DenoiseBlock block;
    HypothesisSet truth;
    std::vector<int> sources;
};
PlantedBlock planted_block(int M, int kappa, double minor_frequency, double eps, int n, RandomStream& stream);

struct BenchResult {
    long trials = 0;
    long successes = 0;
    long capacity_refusals = 0;
    long indeterminate = 0;
    long degraded = 0;
};

// n < 0 draws each block's row count from Poisson(coverage).
BenchResult denoise_bench(int M, int kappa, double minor_frequency, double eps, int n, double coverage,
                          DenoiseMethod method, const SpectralOptions& spectral, long trials, std::uint64_t seed,
                          long first_trial = 0);

}  // namespace poolseq
