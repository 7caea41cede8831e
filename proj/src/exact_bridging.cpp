#include "poolseq/exact_bridging.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "poolseq/error.hpp"
#include "poolseq/noiseless_bounds.hpp"
#include "poolseq/stats.hpp"

namespace poolseq {

namespace {

double phi(double z)
{
    return std::fabs(z) < 1e-300 ? 1.0 : std::expm1(z) / z;
}

// Draw from Exp(rate) truncated to [0, hi] by inversion.
double truncated_exponential(double rate, double hi, RandomStream& s)
{
    if (!(rate > 0.0)) return s.uniform() * hi;
    double u = s.uniform();
    return -std::log1p(u * std::expm1(-rate * hi)) / rate;
}

}  // namespace

double p_fail_step(double d_prev, double ell_prev, double lambda, double p, double eta)
{
    require(d_prev + ell_prev >= 0.0, "chain state must have d + ell >= 0");
    return p_m(2, lambda, p, eta, d_prev + ell_prev);
}

double p_fail_step_exact(double d_prev, double ell_prev, double lambda, double p, double eta)
{
    require(d_prev >= 0.0 && ell_prev >= 0.0, "chain state must be non-negative");
    const double r = p * (1.0 - eta), a = 2.0 * lambda;
    const double lo = std::min(a, r), delta = std::fabs(a - r);
    return std::min(1.0, std::exp(-r * ell_prev) +
                             r * std::exp(-a * d_prev) * ell_prev * std::exp(-lo * ell_prev) * phi(-delta * ell_prev));
}

std::optional<ChainState> sample_transition(const ChainState& st, double lambda, double p, double eta, double L,
                                            RandomStream& stream, ChainKernel kernel)
{
    const double r = p * (1.0 - eta), a = 2.0 * lambda;
    const double span = st.d + st.ell;
    ChainState next;
    next.step = st.step + 1;
    if (kernel == ChainKernel::fresh_stretch) {
        if (stream.uniform() < p_fail_step(st.d, st.ell, lambda, p, eta)) return std::nullopt;
        next.d = truncated_exponential(r, span, stream);
        double z = truncated_exponential(a, span - next.d, stream);
        next.ell = L - next.d - z;
        return next;
    }
    // Last new discriminating SNP, measured back from the new read end.
    double x = stream.exponential(r);
    if (!(x < st.ell)) return std::nullopt;
    // Latest read start between the previous current SNP and the new one.
    double z = stream.exponential(a);
    if (!(z < span - x)) return std::nullopt;
    next.d = x;
    next.ell = L - x - z;
    return next;
}

double sample_span(double G, double rate, RandomStream& stream)
{
    require(rate > 0.0, "span sampling needs a positive rate");
    const double x = G * rate;
    const double Z = -std::expm1(-x) - x * std::exp(-x);
    const double target = stream.uniform() * Z;
    // G - L_R has density r^2 u e^{-r u} on [0, G].
    auto cdf = [&](double u) { return -std::expm1(-rate * u) - rate * u * std::exp(-rate * u) - target; };
    boost::math::tools::eps_tolerance<double> tol(30);
    auto [lo, hi] = boost::math::tools::bisect(cdf, 0.0, G, tol);
    return G - 0.5 * (lo + hi);
}

BridgingEstimate estimate_bridging(double G, double L, double lambda, double p, double eta, long trials,
                                   std::uint64_t seed, ChainKernel kernel, long first_trial)
{
    require(trials >= 1, "estimate_bridging needs at least one trial");
    BridgingEstimate est;
    est.trials = trials;
    const double r = p * (1.0 - eta);
    const double x = G * r;
    est.prefactor = x > 0.0 ? -std::expm1(-x) - x * std::exp(-x) : 0.0;
    if (!(est.prefactor > 0.0)) return est;

    for (long t = first_trial; t < first_trial + trials; ++t) {
        RandomStream s(seed, static_cast<std::uint64_t>(t), Role::chain);
        const double LR = sample_span(G, r, s);
        // Latest read start at or before the first discriminating SNP (placed at 0).
        const double back = s.exponential(2.0 * lambda);
        bool failed = false;
        if (!(back < L)) {
            failed = true;
        } else {
            double end = L - back;
            ChainState st{0.0, end, 0};
            while (!(end > LR)) {
                if (st.step >= kChainStepCap) {
                    ++est.capped;
                    failed = true;
                    break;
                }
                auto nx = sample_transition(st, lambda, p, eta, L, s, kernel);
                if (!nx) {
                    failed = true;
                    break;
                }
                st = *nx;
                end += st.ell;
            }
            est.max_steps = std::max(est.max_steps, st.step);
        }
        if (failed) ++est.failures;
    }
    Interval ci = wilson_interval(static_cast<double>(est.failures), static_cast<double>(trials));
    est.estimate = est.prefactor * static_cast<double>(est.failures) / static_cast<double>(trials);
    est.ci_low = est.prefactor * ci.low;
    est.ci_high = est.prefactor * ci.high;
    return est;
}

}  // namespace poolseq
