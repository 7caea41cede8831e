#include "poolseq/noiseless_bounds.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/minima.hpp>

#include "poolseq/error.hpp"

namespace poolseq {

namespace {

double clamp01(double x)
{
    if (std::isnan(x)) return 1.0;
    return std::clamp(x, 0.0, 1.0);
}

// expm1(z)/z with the removable singularity filled in.
double phi(double z)
{
    return std::fabs(z) < 1e-300 ? 1.0 : std::expm1(z) / z;
}

// integral_0^1 t e^{y t} dt
double g_int(double y)
{
    if (std::fabs(y) < 0.5) {
        double term = 0.5, sum = 0.0;
        for (int m = 2; m < 40; ++m) {
            sum += term;
            term *= y * static_cast<double>(m) / (static_cast<double>(m + 1) * static_cast<double>(m - 1));
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    }
    return (std::exp(y) * (y - 1.0) + 1.0) / (y * y);
}

double binom(int n, int k)
{
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

}  // namespace

std::string event_name(Event e)
{
    switch (e) {
    case Event::E_SC: return "E_SC";
    case Event::E_B: return "E_B";
    default: return "E";
    }
}

std::string variant_name(Variant v)
{
    switch (v) {
    case Variant::exact: return "exact";
    case Variant::asymptotic: return "asymptotic";
    default: return "headline";
    }
}

double coverage_single(double G, double p, double lambda, double L)
{
    if (!(p > 0.0)) return 0.0;
    if (!(lambda > 0.0)) return -std::expm1(-G * p);
    return -std::expm1(-G * std::exp(-lambda * L) / (1.0 / p + 1.0 / lambda));
}

double x_opt(double p, double lambda)
{
    return std::log1p(p / lambda) / p;
}

double coverage_segment_lower(double G, double p, double lambda, double L, int M, double x)
{
    if (!(x > 0.0) || !(p > 0.0)) return 0.0;
    double n = std::floor(G / (L + x));
    if (n < 1.0) return 0.0;
    double miss = std::exp(-lambda * (L + x));
    double Px = -std::expm1(static_cast<double>(M) * std::log1p(-miss));
    if (!(miss < 1.0)) Px = 1.0;
    double per = Px * -std::expm1(-p * x);
    if (per >= 1.0) return 1.0;
    return -std::expm1(n * std::log1p(-per));
}

double coverage_segment_lower_best(double G, double p, double lambda, double L, int M, double* x_best)
{
    if (!(p > 0.0) || !(lambda > 0.0)) {
        if (x_best) *x_best = 0.0;
        return 0.0;
    }
    const double x0 = x_opt(p, lambda);
    auto neg = [&](double lx) { return -coverage_segment_lower(G, p, lambda, L, M, std::exp(lx)); };
    auto r = boost::math::tools::brent_find_minima(neg, std::log(x0 / 10.0), std::log(x0 * 10.0), 40);
    double best = -r.second, bx = std::exp(r.first);
    double at_seed = coverage_segment_lower(G, p, lambda, L, M, x0);
    if (at_seed > best) {
        best = at_seed;
        bx = x0;
    }
    // The floor on the segment count makes the objective saw-toothed; each
    // tooth peaks where the count is about to drop, at x = G/n - L.
    const double n0 = std::floor(G / (L + bx));
    for (double n = std::max(1.0, n0 - 64.0); n <= n0 + 64.0; n += 1.0) {
        const double x = G / n - L;
        if (!(x > 0.0)) continue;
        const double v = coverage_segment_lower(G, p, lambda, L, M, x * (1.0 - 1e-12));
        if (v > best) {
            best = v;
            bx = x * (1.0 - 1e-12);
        }
    }
    if (x_best) *x_best = bx;
    return best;
}

BoundReport coverage_bounds(double G, double p, double lambda, double L, int M, Variant v)
{
    require(M >= 1, "coverage bounds need M >= 1");
    BoundReport rep;
    rep.event = Event::E_SC;
    rep.variant = v;
    rep.G = G, rep.p = p, rep.lambda = lambda, rep.L = L, rep.M = M;
    if (v == Variant::exact) {
        double single = coverage_single(G, p, lambda, L);
        rep.upper_raw = M * single;
        rep.lower_raw = std::max(single, coverage_segment_lower_best(G, p, lambda, L, M));
    } else {
        double a = G * M / (1.0 / p + 1.0 / lambda) * std::exp(-lambda * L);
        double alt = std::pow(1.0 + p / lambda, -lambda / p) / (lambda * L + lambda / p * std::log1p(p / lambda));
        rep.upper_raw = a;
        rep.lower_raw = a * std::max(1.0 / M, alt);
    }
    rep.upper = clamp01(rep.upper_raw);
    rep.lower = std::min(clamp01(rep.lower_raw), rep.upper);
    return rep;
}

double p_m(int m, double lambda, double p, double eta, double L)
{
    require(m >= 1, "P_m needs m >= 1");
    const double r = p * (1.0 - eta);
    const double a = m * lambda;
    const double lo = std::min(a, r), delta = std::fabs(a - r);
    return std::min(1.0, std::exp(-r * L) + r * L * std::exp(-lo * L) * phi(-delta * L));
}

double p_m_asymptotic(int m, double lambda, double p, double eta, double L)
{
    const double r = p * (1.0 - eta);
    const double a = m * lambda;
    const double lo = std::min(a, r), hi = std::max(a, r);
    if (hi <= lo) return p_m(m, lambda, p, eta, L);
    return std::exp(-lo * L) / (1.0 - lo / hi);
}

double delta_m(int M, double lambda, double p, double eta, double L)
{
    require(M >= 2, "Delta needs M >= 2");
    double s = 0.0;
    for (int m = 2; m <= M; ++m)
        s += ((m % 2 == 0) ? 1.0 : -1.0) * (m - 1) * binom(M, m) * p_m(m, lambda, p, eta, L);
    return clamp01(s);
}

double delta_m_unweighted(int M, double lambda, double p, double eta, double L)
{
    require(M >= 2, "Delta needs M >= 2");
    double s = 0.0;
    for (int m = 2; m <= M; ++m) s += ((m % 2 == 0) ? 1.0 : -1.0) * binom(M, m) * p_m(m, lambda, p, eta, L);
    return clamp01(s);
}

double lambda_lower(double q, double G, double L, double p, double eta)
{
    require(q >= 0.0 && q <= 1.0, "Lambda(q) needs q in [0,1]");
    const double r = p * (1.0 - eta);
    if (!(r > 0.0) || q <= 0.0) return 0.0;
    const double x = G * r;
    const double Z = x * x * g_int(-x);
    if (q >= 1.0) return clamp01(Z);
    const double a = -std::log1p(-q) / L;
    const double y = (a - r) * G;
    double tail;
    if (y > 0.5)
        tail = x * x * (std::exp(-x) * (y - 1.0) + std::exp(-a * G)) / (y * y);
    else
        tail = x * x * std::exp(-a * G) * g_int(y);
    return clamp01(Z - tail);
}

double lambda_lower_asymptotic(double q, double G, double L)
{
    return -std::expm1(-G * q / L);
}

BoundReport bridging_bounds(int M, double G, double p, double eta, double lambda, double L, Variant v)
{
    require(M >= 2, "bridging bounds need M >= 2");
    BoundReport rep;
    rep.event = Event::E_B;
    rep.variant = v;
    rep.G = G, rep.p = p, rep.eta = eta, rep.lambda = lambda, rep.L = L, rep.M = M;
    const double r = p * (1.0 - eta);
    if (!(r > 0.0)) {
        rep.degenerate = true;
        rep.lower = rep.upper = rep.lower_raw = rep.upper_raw = 0.0;
        return rep;
    }
    const double pairs = binom(M, 2);
    switch (v) {
    case Variant::exact:
        rep.upper_raw = pairs * G * r * p_m(2, lambda, p, eta, L);
        rep.lower_raw = lambda_lower(delta_m(M, lambda, p, eta, L), G, L, p, eta);
        break;
    case Variant::asymptotic: {
        rep.upper_raw = pairs * G * r * p_m_asymptotic(2, lambda, p, eta, L);
        double d = 0.0;
        for (int m = 2; m <= M; ++m)
            d += ((m % 2 == 0) ? 1.0 : -1.0) * (m - 1) * binom(M, m) * p_m_asymptotic(m, lambda, p, eta, L);
        rep.lower_raw = std::max(0.0, G / L * d);
        break;
    }
    case Variant::headline:
        rep.upper_raw = 0.5 * G * M * M * r * std::exp(-r * L);
        rep.lower_raw = G / L * std::exp(-r * L);
        break;
    }
    rep.upper = clamp01(rep.upper_raw);
    rep.lower = std::min(clamp01(rep.lower_raw), rep.upper);
    return rep;
}

BoundReport assembly_bounds(const ModelConfig& c, Variant v)
{
    c.validate();
    const double G = c.genome_length_G, p = c.snp_rate_p, lam = c.read_density_lambda, L = c.read_length_L;
    const int M = c.num_individuals_M;
    const double eta = c.eta();
    BoundReport rep;
    rep.event = Event::E;
    rep.variant = v;
    rep.G = G, rep.p = p, rep.eta = eta, rep.lambda = lam, rep.L = L, rep.M = M;

    Variant cov_v = v == Variant::exact ? Variant::exact : Variant::asymptotic;
    BoundReport cov = coverage_bounds(G, p, lam, L, M, cov_v);
    if (M < 2) {
        rep.lower_raw = cov.lower_raw, rep.upper_raw = cov.upper_raw;
        rep.lower = cov.lower, rep.upper = cov.upper;
        return rep;
    }
    BoundReport br = bridging_bounds(M, G, p, eta, lam, L, v);
    rep.degenerate = br.degenerate;
    if (v == Variant::headline) {
        rep.lower_raw = br.lower_raw;
        rep.upper_raw = br.upper_raw;
    } else {
        rep.lower_raw = std::max(cov.lower_raw, br.lower_raw);
        rep.upper_raw = cov.upper_raw + br.upper_raw;
    }
    rep.upper = clamp01(rep.upper_raw);
    rep.lower = std::min(clamp01(rep.lower_raw), rep.upper);
    return rep;
}

}  // namespace poolseq
