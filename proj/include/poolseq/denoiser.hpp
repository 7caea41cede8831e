#pragma once

#include <cstdint>
#include <vector>

#include "poolseq/random.hpp"

namespace poolseq {

// n x kappa observations over {-1,+1}; -1 is the major allele.
struct DenoiseBlock {
    int kappa = 0;
    int n = 0;
    std::vector<std::int8_t> observations;
    double window_start = 0.0;
    double window_end = 0.0;
    int M = 2;
    double eps = 0.0;

    const std::int8_t* row(int i) const { return observations.data() + static_cast<std::size_t>(i) * kappa; }
};

struct HypothesisSet {
    std::vector<std::vector<std::int8_t>> sequences;

    int M() const { return static_cast<int>(sequences.size()); }
    bool distinct() const;
    // Order-insensitive equality.
    bool same_as(const HypothesisSet& other) const;
};

// Bit k set <=> entry k is +1. kappa must be at most 64.
std::uint64_t encode_pattern(const std::int8_t* v, int kappa);
std::vector<std::int8_t> decode_pattern(std::uint64_t code, int kappa);
HypothesisSet hypothesis_from_codes(const std::vector<std::uint64_t>& codes, int kappa);
std::vector<std::uint64_t> codes_of(const HypothesisSet& h);

double observation_likelihood(const std::vector<std::int8_t>& phi, const HypothesisSet& psi, double eps);
// Sum over rows of log P{row | psi}.
double block_log_likelihood(const DenoiseBlock& block, const HypothesisSet& psi);

inline constexpr double kMlEnumerationCap = 1e7;

HypothesisSet ml_denoise(const DenoiseBlock& block);

struct CorrelationGraph {
    int n = 0;
    std::vector<double> C;
    std::vector<std::uint8_t> A;
    double tau_c = 0.0;

    double c(int i, int j) const { return C[static_cast<std::size_t>(i) * n + j]; }
    bool edge(int i, int j) const { return A[static_cast<std::size_t>(i) * n + j] != 0; }
};

enum class NuMinMode { worst_case, average_case };

double nu_min_for(NuMinMode mode, int kappa, double eta);
double default_tau(double eps, double nu_min, int kappa);

CorrelationGraph build_correlation_graph(const DenoiseBlock& block, double tau_c);

struct SpectralOptions {
    NuMinMode mode = NuMinMode::worst_case;
    double eta = 0.82;
    // Negative means use default_tau.
    double tau_c = -1.0;
    int max_iterations = 50;
    int max_retries = 5;
};

struct SpectralResult {
    HypothesisSet hypothesis;
    std::vector<int> labels;
    bool degraded = false;
    int retries = 0;
    double tau_c = 0.0;
};

SpectralResult spectral_denoise(const DenoiseBlock& block, const SpectralOptions& options, RandomStream& stream);

std::vector<std::int8_t> majority_vote(const DenoiseBlock& block, const std::vector<std::uint32_t>& rows);

}  // namespace poolseq
