#include "poolseq/noisy_bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/minima.hpp>

#include "poolseq/error.hpp"
#include "poolseq/kernels.hpp"

namespace poolseq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binom(double n, double k)
{
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

double log_binom(double n, double k)
{
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double clamp01(double x)
{
    if (std::isnan(x)) return 1.0;
    return std::clamp(x, 0.0, 1.0);
}

// Mixture law over all 2^kappa patterns for the hypothesis given by codes.
std::vector<double> mixture(const std::vector<std::uint64_t>& codes, int kappa, double eps,
                            const std::vector<std::uint64_t>& all)
{
    std::vector<double> w(static_cast<std::size_t>(kappa) + 1);
    for (int r = 0; r <= kappa; ++r) w[static_cast<std::size_t>(r)] = std::pow(eps, r) * std::pow(1.0 - eps, kappa - r);
    std::vector<double> P(all.size(), 0.0);
    std::vector<std::uint32_t> dist(all.size());
    for (auto v : codes) {
        kernels::hamming_many(&v, all.data(), all.size(), 1, dist.data());
        for (std::size_t f = 0; f < all.size(); ++f) P[f] += w[dist[f]];
    }
    for (auto& x : P) x /= static_cast<double>(codes.size());
    return P;
}

std::vector<std::uint64_t> all_patterns(int kappa)
{
    std::vector<std::uint64_t> all(std::size_t{1} << kappa);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    return all;
}

double bhattacharyya_exponent(const std::vector<double>& P, const std::vector<double>& Q)
{
    double bc = kernels::bhattacharyya_sum(P.data(), Q.data(), P.size());
    return std::max(0.0, -std::log(std::min(1.0, bc)));
}

}  // namespace

void validate_plan(const SegmentationPlan& plan, double L)
{
    require(plan.d > 0.0 && plan.d < plan.D && plan.D <= L,
            "segmentation plan must satisfy 0 < d < D <= L");
}

double disc_upper(int M, double p, double eta, double D, double d)
{
    require(M >= 1, "M must be positive");
    require(d <= D, "disc_upper needs d <= D");
    if (M < 2) return 0.0;
    const double span = p * (D - d);
    const int K = M * (M - 1) / 2;
    if (K <= 3) {
        double s = 0.0;
        for (int m = 1; m <= K; ++m)
            s += binom(K, m) * ((m % 2 == 1) ? 1.0 : -1.0) * std::exp(-span * (1.0 - std::pow(eta, m)));
        return clamp01(s);
    }
    // Equivalent positive series: P{some pair identical} = E_n[1 - (1 - eta^n)^K], n ~ Poisson(span).
    if (!(span > 0.0)) return 1.0;
    boost::math::poisson_distribution<double> pois(span);
    double s = 0.0;
    const auto hi = static_cast<long>(boost::math::quantile(boost::math::complement(pois, 1e-16))) + 2;
    for (long n = 0; n <= hi; ++n) {
        double en = std::pow(eta, static_cast<double>(n));
        double fail = en >= 1.0 ? 1.0 : -std::expm1(K * std::log1p(-en));
        s += boost::math::pdf(pois, static_cast<double>(n)) * fail;
    }
    return clamp01(s);
}

double exponent_numeric(const HypothesisSet& psi_T, const HypothesisSet& psi, double eps)
{
    require(psi_T.M() >= 1 && psi.M() >= 1, "empty hypothesis");
    const auto kappa = static_cast<int>(psi_T.sequences[0].size());
    if (kappa > 14) throw CapacityError("exponent enumeration over 2^" + std::to_string(kappa) + " patterns refused");
    auto all = all_patterns(kappa);
    return bhattacharyya_exponent(mixture(codes_of(psi_T), kappa, eps, all), mixture(codes_of(psi), kappa, eps, all));
}

std::pair<HypothesisSet, HypothesisSet> canonical_pair(int M, int kappa)
{
    require(M == 2 || M == 3, "canonical pairs are defined for M = 2 and M = 3");
    require(kappa >= 2, "canonical pairs need kappa >= 2");
    if (M == 2) return {hypothesis_from_codes({0, 1}, kappa), hypothesis_from_codes({0, 2}, kappa)};
    return {hypothesis_from_codes({0, 1, 3}, kappa), hypothesis_from_codes({0, 1, 2}, kappa)};
}

double exponent_closed(int M, double eps)
{
    require(eps >= 0.0 && eps <= 0.5, "eps must lie in [0,0.5]");
    const double v = eps * (1.0 - eps);
    if (M == 2) return std::max(0.0, -std::log(0.5 + std::sqrt(v)));
    if (M == 3) {
        double b = (2.0 / 3.0) * std::sqrt(1.0 - v) *
                   (std::sqrt(2.0 * v + eps * eps) + std::sqrt(2.0 * v + (1.0 - eps) * (1.0 - eps)));
        return std::max(0.0, -std::log(b));
    }
    int kappa = 1;
    while ((1 << kappa) < M + 1) ++kappa;
    return exponent_table(M, kappa, eps, ExponentMethod::numeric).at(1);
}

int matching_distance(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b)
{
    require(a.size() == b.size(), "hypotheses differ in size");
    require(a.size() <= 6, "matching distance enumerates permutations of at most 6 sequences");
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int best = std::numeric_limits<int>::max();
    do {
        int d = 0;
        for (std::size_t k = 0; k < a.size(); ++k) d += std::popcount(a[k] ^ b[perm[k]]);
        best = std::min(best, d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double ExponentTable::min() const
{
    return *std::min_element(D.begin(), D.end());
}

namespace {

bool table_tractable(int M, int kappa)
{
    return kappa <= 14 && log_binom(std::ldexp(1.0, kappa), M) <= std::log(6000.0);
}

ExponentTable build_table(int M, int kappa, double eps, ExponentMethod method)
{
    ExponentTable t;
    t.M = M, t.kappa = kappa, t.epsilon = eps, t.method = method;
    const auto n_entries = static_cast<std::size_t>(M) * static_cast<std::size_t>(kappa);
    if (method == ExponentMethod::closed_form) {
        t.D.assign(n_entries, exponent_closed(M, eps));
        return t;
    }
    if (!table_tractable(M, kappa))
        throw CapacityError("exhaustive exponent table for M=" + std::to_string(M) + ", kappa=" +
                            std::to_string(kappa) + " refused");
    t.D.assign(n_entries, kInf);
    auto all = all_patterns(kappa);
    const std::uint64_t V = all.size();
    std::vector<std::vector<std::uint64_t>> hyps;
    std::vector<std::uint64_t> cur(static_cast<std::size_t>(M));
    auto gen = [&](auto&& self, int depth, std::uint64_t from) -> void {
        if (depth == M) {
            hyps.push_back(cur);
            return;
        }
        for (std::uint64_t v = from; v < V; ++v) {
            cur[static_cast<std::size_t>(depth)] = v;
            self(self, depth + 1, v + 1);
        }
    };
    gen(gen, 0, 0);
    std::vector<std::vector<double>> mix;
    mix.reserve(hyps.size());
    for (const auto& h : hyps) mix.push_back(mixture(h, kappa, eps, all));
    // XOR-translating both hypotheses preserves distance and exponent, so the
    // true hypothesis can be taken to contain the all-major pattern.
    for (std::size_t a = 0; a < hyps.size(); ++a) {
        if (hyps[a][0] != 0) continue;
        for (std::size_t b = 0; b < hyps.size(); ++b) {
            if (a == b) continue;
            int dist = matching_distance(hyps[a], hyps[b]);
            double e = bhattacharyya_exponent(mix[a], mix[b]);
            auto& slot = t.D[static_cast<std::size_t>(dist) - 1];
            slot = std::min(slot, e);
        }
    }
    return t;
}

}  // namespace

ExponentTable exponent_table(int M, int kappa, double eps, ExponentMethod method)
{
    require(M >= 1 && kappa >= 1, "exponent tables need M >= 1 and kappa >= 1");
    static std::mutex mu;
    static std::map<std::tuple<int, int, std::uint64_t, int>, ExponentTable> cache;
    std::uint64_t eb;
    std::memcpy(&eb, &eps, sizeof eb);
    auto key = std::make_tuple(M, kappa, eb, static_cast<int>(method));
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    ExponentTable t = build_table(M, kappa, eps, method);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(t)).first->second;
}

double den_ml_upper(int M, int kappa, double coverage, const ExponentTable& table)
{
    const int top = M * kappa;
    require(static_cast<int>(table.D.size()) >= top, "exponent table too short");
    double s = 0.0;
    for (int i = 1; i <= top; ++i) {
        double Di = table.at(i);
        if (std::isinf(Di)) continue;
        s += binom(top, i) * std::exp(-coverage * -std::expm1(-Di));
    }
    return s;
}

double den_ml_upper_marginal(int M, double p, double D, double lambda, double L, double eps, BoundMode mode)
{
    require(D <= L, "denoising bound needs D <= L");
    const double coverage = lambda * M * (L - D);
    if (mode == BoundMode::asymptotic) {
        double D1 = exponent_closed(M, eps);
        return M * p * D * std::exp(-coverage * -std::expm1(-D1));
    }
    if (!(p * D > 0.0)) return 0.0;
    boost::math::poisson_distribution<double> pois(p * D);
    const auto hi = static_cast<int>(boost::math::quantile(boost::math::complement(pois, 1e-12)));
    // Blocks too wide for an exhaustive table count as failures.
    int top = 0;
    while (top < hi && table_tractable(M, top + 1)) ++top;
    double s = 0.0;
    for (int kappa = 1; kappa <= top; ++kappa) {
        ExponentTable t = exponent_table(M, kappa, eps, ExponentMethod::numeric);
        s += boost::math::pdf(pois, static_cast<double>(kappa)) * std::min(1.0, den_ml_upper(M, kappa, coverage, t));
    }
    if (top < hi) s += boost::math::cdf(boost::math::complement(pois, static_cast<double>(top)));
    return s;
}

namespace {

using Objective = std::function<double(double, double)>;

// Coordinate descent on log(objective) from several seeds.
NoisyBoundResult minimize_plan(const Objective& log_obj, double L, const std::vector<SegmentationPlan>& seeds)
{
    NoisyBoundResult best;
    double best_val = kInf;
    int evals = 0;
    auto f = [&](double D, double d) {
        ++evals;
        D = std::min(D, L);
        double v = log_obj(D, d);
        return std::isnan(v) ? kInf : v;
    };
    for (auto s : seeds) {
        double D = std::clamp(s.D, L * 1e-6, L);
        double d = std::clamp(s.d, D * 1e-9, D * (1.0 - 1e-9));
        double val = f(D, d);
        for (int it = 0; it < 64; ++it) {
            double prev = val;
            auto rd = boost::math::tools::brent_find_minima([&](double ld) { return f(D, std::exp(ld)); },
                                                            std::log(D * 1e-9), std::log(D * (1.0 - 1e-9)), 40);
            if (rd.second < val) {
                d = std::exp(rd.first);
                val = rd.second;
            }
            auto rD = boost::math::tools::brent_find_minima([&](double lD) { return f(std::exp(lD), d); },
                                                            std::log(d * (1.0 + 1e-9)), std::log(L), 40);
            if (rD.second < val) {
                D = std::min(std::exp(rD.first), L);
                val = rD.second;
            }
            if (std::fabs(prev - val) <= 1e-4 * std::max(1.0, std::fabs(val)) && it > 0) break;
        }
        if (val < best_val) {
            best_val = val;
            best.plan = {D, d};
        }
    }
    best.evaluations = evals;
    return best;
}

double log_sum(double a, double b)
{
    return std::log(a + b);
}

}  // namespace

SegmentationPlan optimal_plan_seed(const ModelConfig& c)
{
    const double L = c.read_length_L, lam = c.read_density_lambda, p = c.snp_rate_p, eta = c.eta();
    const int M = c.num_individuals_M;
    const double r = p * (1.0 - eta);
    const double k = lam * M * -std::expm1(-exponent_closed(std::max(M, 2), c.noise_eps));
    SegmentationPlan s{0.9 * L, 0.5 * L};
    if (!(k > 0.0) || !(r > 0.0)) return s;
    double Ds = (L + std::log((std::max(M, 2) - 1) * (1.0 - eta) / (2.0 * (1.0 + M * L * lam))) / k) / (1.0 + r / k);
    double ds = (1.0 / r) * (1.0 + p * Ds * std::exp(-k * (L - Ds)) / (0.5 * (std::max(M, 2) - 1) * std::exp(1.0 - r * Ds)));
    if (std::isfinite(Ds) && Ds > 0.0) s.D = std::min(Ds, L);
    if (std::isfinite(ds) && ds > 0.0) s.d = ds;
    if (s.d >= s.D) s.d = 0.5 * s.D;
    return s;
}

NoisyBoundResult noisy_upper_ml(const ModelConfig& c, std::optional<SegmentationPlan> plan, BoundMode mode)
{
    c.validate();
    const double G = c.genome_length_G, L = c.read_length_L, lam = c.read_density_lambda, p = c.snp_rate_p;
    const double eta = c.eta(), r = p * (1.0 - eta);
    const int M = c.num_individuals_M;
    const double pairs = M * (M - 1) / 2.0;

    auto terms = [&](double D, double d) {
        double disc = mode == BoundMode::asymptotic ? pairs * std::exp(-r * (D - d)) : disc_upper(M, p, eta, D, d);
        double den = M < 2 && c.noise_eps == 0.0 ? 0.0 : den_ml_upper_marginal(std::max(M, 1), p, D, lam, L, c.noise_eps, mode);
        return std::make_pair(disc, den);
    };
    auto log_obj = [&](double D, double d) {
        auto [disc, den] = terms(D, d);
        return std::log(G / d) + log_sum(disc, den);
    };

    NoisyBoundResult res;
    if (plan) {
        validate_plan(*plan, L);
        res.plan = *plan;
        res.evaluations = 1;
    } else {
        SegmentationPlan seed = optimal_plan_seed(c);
        std::vector<SegmentationPlan> seeds{seed, {L, std::min(1.0 / std::max(r, 1e-300), 0.5 * L)}, {0.5 * L, 0.25 * L}};
        res = minimize_plan(log_obj, L, seeds);
    }
    res.mode = mode;
    auto [disc, den] = terms(res.plan.D, res.plan.d);
    res.disc_term = G / res.plan.d * disc;
    res.den_term = G / res.plan.d * den;
    res.raw = res.disc_term + res.den_term;
    res.bound = clamp01(res.raw);
    return res;
}

SpectralBoundParams spectral_quantities(int kappa, double eta, double eps, NuMinMode mode, double c_const)
{
    require(kappa >= 1, "spectral quantities need kappa >= 1");
    SpectralBoundParams q;
    q.c_const = c_const;
    const double nu = nu_min_for(mode, kappa, eta);
    const double a = 1.0 - 2.0 * eps;
    q.P_e = std::exp(-(nu * nu / kappa) * a * a * a * a);
    q.a_lower = 1.0 - q.P_e;
    q.b_upper = q.P_e;
    q.zeta = q.P_e < 0.5 ? (1.0 - 2.0 * q.P_e) * (1.0 - 2.0 * q.P_e) / (c_const * c_const * (1.0 - q.P_e)) : 0.0;
    return q;
}

double spectral_eps_threshold(int kappa, double nu_min)
{
    return 0.5 - 0.5 * std::pow(kappa * std::log(2.0) / (nu_min * nu_min), 0.25);
}

double spectral_eps_threshold_asymptotic(int kappa, double eta)
{
    return 0.5 * (1.0 - std::pow(std::log(2.0) / (kappa * (1.0 - eta) * (1.0 - eta)), 0.25));
}

NoisyBoundResult noisy_upper_spectral(const ModelConfig& c, std::optional<SegmentationPlan> plan,
                                      const SpectralBoundOptions& opt)
{
    c.validate();
    const double G = c.genome_length_G, L = c.read_length_L, lam = c.read_density_lambda, p = c.snp_rate_p;
    const double eta = c.eta(), eps = c.noise_eps;
    const int M = c.num_individuals_M;

    auto community = [&](double D) {
        const double cov = lam * M * (L - D);
        auto term = [&](int kappa) {
            double zeta = kappa >= 1 ? spectral_quantities(kappa, eta, eps, opt.nu_mode, opt.c_const).zeta : 0.0;
            return std::exp(-zeta) * std::exp(-cov * -std::expm1(-zeta));
        };
        double avg = 0.0;
        if (opt.mode == BoundMode::asymptotic || !(p * D > 0.0)) {
            avg = term(static_cast<int>(std::floor(p * D)));
        } else {
            boost::math::poisson_distribution<double> pois(p * D);
            const auto lo = static_cast<int>(boost::math::quantile(pois, 1e-13));
            const auto hi = static_cast<int>(boost::math::quantile(boost::math::complement(pois, 1e-13)));
            for (int k = lo; k <= hi; ++k) avg += boost::math::pdf(pois, static_cast<double>(k)) * term(k);
        }
        return cov * avg + (opt.empty_block_failure ? std::exp(-cov) : 0.0);
    };
    auto terms = [&](double D, double d) {
        double disc = disc_upper(M, p, eta, D, d);
        double span = opt.vote_over_covering_span ? L - D : D;
        double rate = eps > 0.0 ? -std::expm1(-1.0 / (8.0 * eps * (1.0 - eps))) : 1.0;
        double vote = M * D * p * std::exp(-lam * M * span * rate);
        return std::make_pair(disc, vote + community(D));
    };
    auto log_obj = [&](double D, double d) {
        auto [disc, den] = terms(D, d);
        return std::log(G / d) + log_sum(disc, den);
    };

    NoisyBoundResult res;
    if (plan) {
        validate_plan(*plan, L);
        res.plan = *plan;
        res.evaluations = 1;
    } else {
        SegmentationPlan seed = optimal_plan_seed(c);
        const double r = p * (1.0 - eta);
        std::vector<SegmentationPlan> seeds{seed, {L, std::min(1.0 / std::max(r, 1e-300), 0.5 * L)}, {0.5 * L, 0.25 * L}};
        res = minimize_plan(log_obj, L, seeds);
    }
    res.mode = opt.mode;
    auto [disc, den] = terms(res.plan.D, res.plan.d);
    res.disc_term = G / res.plan.d * disc;
    res.den_term = G / res.plan.d * den;
    res.raw = res.disc_term + res.den_term;
    res.bound = clamp01(res.raw);
    return res;
}

}  // namespace poolseq
