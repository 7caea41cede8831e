#pragma once

#include <utility>
#include <vector>

namespace poolseq {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

Interval wilson_interval(double successes, double trials, double z = 1.959963984540054);
// Standard deviation of a binomial proportion on the Wilson scale.
double wilson_sigma(double successes, double trials);

// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double statistic, double dof);

// Pearson goodness of fit of integer counts against a Poisson law; bins with
// expected count below min_expected are pooled into the tails.
struct GofResult {
    double statistic = 0.0;
    double dof = 0.0;
    double pvalue = 0.0;
};
GofResult poisson_gof(const std::vector<long>& counts, double mean, double min_expected = 5.0);

// One-sample Kolmogorov-Smirnov test against Exponential(rate).
struct KsResult {
    double statistic = 0.0;
    double pvalue = 0.0;
};
KsResult ks_exponential(std::vector<double> sample, double rate);
// Two-sample KS.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
double kolmogorov_pvalue(double lambda);

}  // namespace poolseq
