#include "poolseq/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace poolseq {

Interval wilson_interval(double k, double n, double z)
{
    if (!(n > 0.0)) return {0.0, 1.0};
    const double ph = k / n, z2 = z * z;
    const double centre = (ph + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    return {k <= 0.0 ? 0.0 : std::max(0.0, centre - half), k >= n ? 1.0 : std::min(1.0, centre + half)};
}

double wilson_sigma(double k, double n)
{
    Interval one = wilson_interval(k, n, 1.0);
    return 0.5 * (one.high - one.low);
}

double chi_square_pvalue(double statistic, double dof)
{
    if (!(dof > 0.0)) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * std::max(0.0, statistic));
}

GofResult poisson_gof(const std::vector<long>& counts, double mean, double min_expected)
{
    boost::math::poisson_distribution<double> pois(mean);
    const double n = static_cast<double>(counts.size());
    // Pool from the left until each bin is large enough; the last bin is the open upper tail.
    std::vector<double> expected, observed;
    long hi = 0;
    for (long c : counts) hi = std::max(hi, c);
    double e_acc = 0.0, o_acc = 0.0;
    std::vector<double> obs_hist(static_cast<std::size_t>(hi) + 1, 0.0);
    for (long c : counts) obs_hist[static_cast<std::size_t>(c)] += 1.0;
    const auto top = static_cast<long>(boost::math::quantile(boost::math::complement(pois, 1e-12))) + 1;
    const long last = std::max(hi, top);
    for (long k = 0; k <= last; ++k) {
        e_acc += n * boost::math::pdf(pois, static_cast<double>(k));
        o_acc += k <= hi ? obs_hist[static_cast<std::size_t>(k)] : 0.0;
        if (e_acc >= min_expected) {
            expected.push_back(e_acc);
            observed.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    double tail_e = n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(last)));
    e_acc += tail_e;
    if (!expected.empty()) {
        expected.back() += e_acc;
        observed.back() += o_acc;
    }
    GofResult r;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<double>(expected.size()) - 1.0;
    r.pvalue = chi_square_pvalue(r.statistic, r.dof);
    return r;
}

double kolmogorov_pvalue(double lambda)
{
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k < 200; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

KsResult ks_exponential(std::vector<double> x, double rate)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = -std::expm1(-rate * x[i]);
        D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    return {D, kolmogorov_pvalue((sn + 0.12 + 0.11 / sn) * D)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        D = std::max(D, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {D, kolmogorov_pvalue((ne + 0.12 + 0.11 / ne) * D)};
}

}  // namespace poolseq
