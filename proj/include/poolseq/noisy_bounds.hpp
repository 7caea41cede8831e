#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "poolseq/denoiser.hpp"
#include "poolseq/model.hpp"

namespace poolseq {

struct SegmentationPlan {
    double D = 0.0;
    double d = 0.0;
};

void validate_plan(const SegmentationPlan& plan, double L);

double disc_upper(int M, double p, double eta, double D, double d);

// Bhattacharyya exponent between the two mixture laws over all 2^kappa patterns.
double exponent_numeric(const HypothesisSet& psi_T, const HypothesisSet& psi, double eps);

// Closed form of the leading exponent for M = 2 and M = 3; other M fall back to
// the numeric minimum over hypothesis pairs one flip apart.
double exponent_closed(int M, double eps);

// The extremal hypothesis pair the closed forms describe, embedded in kappa SNPs.
std::pair<HypothesisSet, HypothesisSet> canonical_pair(int M, int kappa);

// Fewest single-entry flips turning one hypothesis into the other, over all matchings.
int matching_distance(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

enum class ExponentMethod { closed_form, numeric };

struct ExponentTable {
    // D[i-1] holds D_i for i = 1..M*kappa; +inf marks distances no pair attains.
    std::vector<double> D;
    double epsilon = 0.0;
    int kappa = 0;
    int M = 0;
    ExponentMethod method = ExponentMethod::numeric;

    double at(int i) const { return D[static_cast<std::size_t>(i) - 1]; }
    double min() const;
};

// numeric: exhaustive minimum over all hypothesis pairs at each matching distance.
// closed_form: every entry set to the closed-form leading exponent.
ExponentTable exponent_table(int M, int kappa, double eps, ExponentMethod method);

// Union bound over hypotheses for a block with kappa SNPs and Poisson(coverage) rows.
double den_ml_upper(int M, int kappa, double coverage, const ExponentTable& table);

enum class BoundMode { exact, asymptotic };

double den_ml_upper_marginal(int M, double p, double D, double lambda, double L, double eps, BoundMode mode);

struct NoisyBoundResult {
    double bound = 1.0;
    double raw = 1.0;
    double disc_term = 0.0;
    double den_term = 0.0;
    SegmentationPlan plan;
    int evaluations = 0;
    BoundMode mode = BoundMode::asymptotic;
};

SegmentationPlan optimal_plan_seed(const ModelConfig& config);

NoisyBoundResult noisy_upper_ml(const ModelConfig& config, std::optional<SegmentationPlan> plan = std::nullopt,
                                BoundMode mode = BoundMode::asymptotic);

struct SpectralBoundParams {
    double P_e = 1.0;
    double a_lower = 0.0;
    double b_upper = 1.0;
    double zeta = 0.0;
    double c_const = 1.0;
};

SpectralBoundParams spectral_quantities(int kappa, double eta, double eps, NuMinMode mode, double c_const = 1.0);
double spectral_eps_threshold(int kappa, double nu_min);
double spectral_eps_threshold_asymptotic(int kappa, double eta);

struct SpectralBoundOptions {
    NuMinMode nu_mode = NuMinMode::worst_case;
    double c_const = 1.0;
    BoundMode mode = BoundMode::exact;
    // Majority-vote exponent over the covering-read span L-D instead of D.
    bool vote_over_covering_span = false;
    // Count a block with no covering read as a community-detection failure.
    // Without it the community term vanishes as D -> L.
    bool empty_block_failure = true;
};

NoisyBoundResult noisy_upper_spectral(const ModelConfig& config, std::optional<SegmentationPlan> plan = std::nullopt,
                                      const SpectralBoundOptions& options = {});

}  // namespace poolseq
