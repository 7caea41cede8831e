#pragma once

#include <cstdint>
#include <optional>

#include "poolseq/random.hpp"

namespace poolseq {

// d: distance from the last discriminating SNP in the current read to the read end.
// ell: offset of the current read's start from the previous current read's start.
struct ChainState {
    double d = 0.0;
    double ell = 0.0;
    long step = 0;
};

// exact: respects that the stretch of length d after the previous last SNP is
// already known to hold no discriminating SNP. fresh_stretch: treats the whole
// d + ell stretch as fresh, and draws d_n from an unconditioned truncated law.
enum class ChainKernel { exact, fresh_stretch };

double p_fail_step(double d_prev, double ell_prev, double lambda, double p, double eta);
double p_fail_step_exact(double d_prev, double ell_prev, double lambda, double p, double eta);

std::optional<ChainState> sample_transition(const ChainState& state, double lambda, double p, double eta, double L,
                                            RandomStream& stream, ChainKernel kernel = ChainKernel::exact);

// Distance between the first and last discriminating SNP given at least two exist.
double sample_span(double G, double rate, RandomStream& stream);

struct BridgingEstimate {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long trials = 0;
    long failures = 0;
    double prefactor = 0.0;
    long max_steps = 0;
    long capped = 0;
};

inline constexpr long kChainStepCap = 1000000;

BridgingEstimate estimate_bridging(double G, double L, double lambda, double p, double eta, long trials,
                                   std::uint64_t seed, ChainKernel kernel = ChainKernel::exact,
                                   long first_trial = 0);

}  // namespace poolseq
