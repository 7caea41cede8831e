#pragma once

#include <string>

#include "poolseq/model.hpp"

namespace poolseq {

enum class Event { E_SC, E_B, E };

// exact: finite-G closed forms. asymptotic: large-G, large-depth forms.
// headline: the two-term sandwich quoted for the assembly error as a whole.
enum class Variant { exact, asymptotic, headline };

std::string event_name(Event e);
std::string variant_name(Variant v);

struct BoundReport {
    Event event = Event::E;
    double lower = 0.0;
    double upper = 1.0;
    double lower_raw = 0.0;
    double upper_raw = 1.0;
    Variant variant = Variant::exact;
    bool degenerate = false;
    double G = 0, p = 0, eta = 0, lambda = 0, L = 0;
    int M = 0;
};

double coverage_single(double G, double p, double lambda, double L);
double x_opt(double p, double lambda);
// Lower bound from non-overlapping segments of length L+x, for one x.
double coverage_segment_lower(double G, double p, double lambda, double L, int M, double x);
// Best segment bound over the x search; writes the maximizer to x_best when given.
double coverage_segment_lower_best(double G, double p, double lambda, double L, int M, double* x_best = nullptr);
BoundReport coverage_bounds(double G, double p, double lambda, double L, int M, Variant v = Variant::exact);

// Probability that m given individuals all lack a read starting between a
// discriminating SNP and the end of a length-L window.
double p_m(int m, double lambda, double p, double eta, double L);
double p_m_asymptotic(int m, double lambda, double p, double eta, double L);

// Probability that at least two of M individuals fail in one segment.
double delta_m(int M, double lambda, double p, double eta, double L);
// The same sum without the (m-1) inclusion-exclusion multiplicity.
double delta_m_unweighted(int M, double lambda, double p, double eta, double L);

double lambda_lower(double q, double G, double L, double p, double eta);
double lambda_lower_asymptotic(double q, double G, double L);

BoundReport bridging_bounds(int M, double G, double p, double eta, double lambda, double L, Variant v = Variant::exact);
BoundReport assembly_bounds(const ModelConfig& config, Variant v = Variant::exact);

}  // namespace poolseq
