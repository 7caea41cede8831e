#include <doctest.h>

#include <cmath>
#include <vector>

#include "poolseq/error.hpp"
#include "poolseq/noisy_bounds.hpp"
#include "poolseq/random.hpp"

using namespace poolseq;

namespace {

ModelConfig noisy_cfg(double G, double L, double depth, double eps)
{
    ModelConfig c;
    c.genome_length_G = G;
    c.num_individuals_M = 2;
    c.snp_rate_p = 1e-3;
    c.allele_law = FixedEta{0.82};
    c.read_length_L = L;
    c.read_density_lambda = depth / L;
    c.noise_eps = eps;
    return c;
}

const std::vector<double> kEpsGrid = [] {
    std::vector<double> v;
    for (int k = 0; k <= 12; ++k) v.push_back(0.01 + 0.04 * k);
    return v;
}();

}  // namespace

TEST_CASE("plan validation")
{
    CHECK_NOTHROW(validate_plan({100, 10}, 100));
    CHECK_THROWS_AS(validate_plan({101, 10}, 100), ContractViolation);
    CHECK_THROWS_AS(validate_plan({50, 50}, 100), ContractViolation);
    CHECK_THROWS_AS(validate_plan({50, 0}, 100), ContractViolation);
}

TEST_CASE("discrimination term for one and two individuals")
{
    CHECK(disc_upper(1, 1e-3, 0.82, 1000, 100) == 0.0);
    CHECK(disc_upper(2, 1e-3, 0.82, 1000, 100) == doctest::Approx(std::exp(-0.9 * 0.18)).epsilon(1e-13));
    CHECK(disc_upper(2, 1e-3, 1.0, 1000, 100) == doctest::Approx(1.0));
}

TEST_CASE("discrimination term matches a Monte Carlo of shared-sequence pairs")
{
    RandomStream rng(31);
    const double p = 1e-3, eta = 0.82, D = 3000, d = 1000;
    const int trials = 40000;
    int same = 0;
    for (int t = 0; t < trials; ++t) {
        auto n = rng.poisson(p * (D - d));
        bool all_match = true;
        for (std::uint64_t k = 0; k < n && all_match; ++k) all_match = rng.bernoulli(eta);
        same += all_match;
    }
    double emp = static_cast<double>(same) / trials;
    double sigma = std::sqrt(emp * (1 - emp) / trials);
    CHECK(std::fabs(emp - disc_upper(2, p, eta, D, d)) < 4 * sigma);
}

TEST_CASE("discrimination series agrees with inclusion-exclusion for many pairs")
{
    const double span = 1.7, eta = 0.6;
    for (int M : {4, 5}) {
        const int K = M * (M - 1) / 2;
        double ie = 0.0;
        for (int m = 1; m <= K; ++m) {
            double c = std::tgamma(K + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(K - m + 1.0));
            ie += c * ((m % 2) ? 1.0 : -1.0) * std::exp(-span * (1.0 - std::pow(eta, m)));
        }
        CHECK(disc_upper(M, 1e-3, eta, 1700 + 50, 50) == doctest::Approx(ie).epsilon(1e-10));
    }
}

TEST_CASE("closed exponents equal the numeric exponent of the extremal pair")
{
    for (int M : {2, 3})
        for (double eps : kEpsGrid)
            for (int kappa = 2; kappa <= 6; ++kappa) {
                auto [a, b] = canonical_pair(M, kappa);
                CHECK(std::fabs(exponent_closed(M, eps) - exponent_numeric(a, b, eps)) < 1e-9);
            }
}

TEST_CASE("exponent limits")
{
    for (int M : {2, 3}) {
        CHECK(std::fabs(exponent_closed(M, 0.0) - std::log(M / (M - 1.0))) < 1e-12);
        CHECK(std::fabs(exponent_closed(M, 0.5)) < 1e-12);
        auto [a, b] = canonical_pair(M, 4);
        CHECK(std::fabs(exponent_numeric(a, b, 0.0) - std::log(M / (M - 1.0))) < 1e-12);
        CHECK(std::fabs(exponent_numeric(a, b, 0.5)) < 1e-12);
    }
}

TEST_CASE("extremal pair exponent does not depend on kappa")
{
    for (int M : {2, 3})
        for (double eps : {0.05, 0.2, 0.41}) {
            auto [a2, b2] = canonical_pair(M, 2);
            double ref = exponent_numeric(a2, b2, eps);
            for (int kappa = 3; kappa <= 8; ++kappa) {
                auto [a, b] = canonical_pair(M, kappa);
                CHECK(std::fabs(exponent_numeric(a, b, eps) - ref) < 1e-9);
            }
        }
}

TEST_CASE("exponents fall as noise grows")
{
    for (int M : {2, 3}) {
        double prev = INFINITY;
        for (double eps : kEpsGrid) {
            double e = exponent_closed(M, eps);
            CHECK(e < prev);
            prev = e;
        }
    }
}

TEST_CASE("matching distance minimises over relabelings")
{
    CHECK(matching_distance({0b00, 0b11}, {0b11, 0b00}) == 0);
    CHECK(matching_distance({0b001, 0b010}, {0b001, 0b100}) == 2);
    CHECK(matching_distance({0b0, 0b1}, {0b1, 0b0}) == 0);
    CHECK(matching_distance({0b000, 0b011, 0b101}, {0b100, 0b011, 0b000}) == 1);
}

TEST_CASE("numeric exponent tables")
{
    SUBCASE("the extremal pair sits at matching distance two and is not the weakest")
    {
        for (double eps : {0.1, 0.2, 0.3, 0.4}) {
            auto t = exponent_table(2, 3, eps, ExponentMethod::numeric);
            CHECK(t.at(2) <= exponent_closed(2, eps) + 1e-12);
            CHECK(t.min() <= exponent_closed(2, eps) + 1e-12);
            CHECK(t.at(1) < exponent_closed(2, eps));
        }
    }
    SUBCASE("distance one is not always the weakest")
    {
        auto t = exponent_table(2, 3, 0.3, ExponentMethod::numeric);
        CHECK(t.at(2) < t.at(1));
        auto t0 = exponent_table(2, 3, 0.1, ExponentMethod::numeric);
        CHECK(t0.at(1) == doctest::Approx(t0.min()));
    }
    SUBCASE("unreachable distances are infinite")
    {
        auto t = exponent_table(2, 2, 0.2, ExponentMethod::numeric);
        REQUIRE(t.D.size() == 4);
        CHECK(std::isinf(t.at(4)));
    }
    SUBCASE("closed-form tables are flat")
    {
        auto t = exponent_table(3, 4, 0.2, ExponentMethod::closed_form);
        CHECK(t.D.size() == 12);
        for (double x : t.D) CHECK(x == exponent_closed(3, 0.2));
    }
    SUBCASE("oversized tables are refused")
    {
        CHECK_THROWS_AS(exponent_table(2, 15, 0.2, ExponentMethod::numeric), CapacityError);
        CHECK_THROWS_AS(exponent_table(4, 6, 0.2, ExponentMethod::numeric), CapacityError);
    }
}

TEST_CASE("ML denoising union bound")
{
    auto t = exponent_table(2, 3, 0.2, ExponentMethod::numeric);
    // No observations: each reachable distance contributes its binomial weight.
    double s0 = 0.0;
    for (int i = 1; i <= 6; ++i)
        if (!std::isinf(t.at(i))) s0 += std::tgamma(7.0) / (std::tgamma(i + 1.0) * std::tgamma(7.0 - i));
    CHECK(den_ml_upper(2, 3, 0.0, t) == doctest::Approx(s0));
    double prev = INFINITY;
    for (double cov : {1.0, 10.0, 30.0, 100.0}) {
        double b = den_ml_upper(2, 3, cov, t);
        CHECK(b < prev);
        prev = b;
    }
    // Large coverage is dominated by the weakest exponent.
    double cov = 2000.0;
    double lead = 6.0 * std::exp(-cov * -std::expm1(-t.min()));
    CHECK(den_ml_upper(2, 3, cov, t) >= lead);
}

TEST_CASE("ML noisy bound optimiser drives D to L and d to 1/r at high depth")
{
    ModelConfig c = noisy_cfg(1e8, 1e5, 1e5, 0.1);
    auto res = noisy_upper_ml(c);
    const double r = 1e-3 * 0.18;
    CHECK(res.plan.D / c.read_length_L > 0.99);
    CHECK(res.plan.d * r == doctest::Approx(1.0).epsilon(0.01));
    CHECK(res.bound < 1e-3);
    CHECK(res.raw == doctest::Approx(res.disc_term + res.den_term));

    double prev = 0.0;
    for (double depth : {100.0, 1e3, 1e4}) {
        auto rr = noisy_upper_ml(noisy_cfg(1e8, 1e5, depth, 0.1));
        CHECK(rr.plan.D > prev);
        prev = rr.plan.D;
    }
}

TEST_CASE("ML noisy bound with a fixed plan")
{
    ModelConfig c = noisy_cfg(1e7, 2e4, 200, 0.1);
    auto fixed = noisy_upper_ml(c, SegmentationPlan{1.5e4, 5e3});
    CHECK(fixed.plan.D == 1.5e4);
    CHECK(fixed.evaluations == 1);
    auto opt = noisy_upper_ml(c);
    CHECK(opt.raw <= fixed.raw * (1 + 1e-9));
    CHECK_THROWS_AS(noisy_upper_ml(c, SegmentationPlan{3e4, 5e3}), ContractViolation);
}

TEST_CASE("ML noisy bound grows with noise")
{
    double prev = 0.0;
    for (double eps : {0.01, 0.1, 0.2, 0.3}) {
        auto r = noisy_upper_ml(noisy_cfg(1e9, 1.2e5, 1000, eps));
        CHECK(r.raw > prev);
        prev = r.raw;
    }
}

TEST_CASE("exact marginal denoising bound")
{
    const double L = 2000, D = 1500, p = 1e-3;
    double prev = 1.0;
    for (double lambda : {0.01, 0.05, 0.2}) {
        double ex = den_ml_upper_marginal(2, p, D, lambda, L, 0.1, BoundMode::exact);
        CHECK(ex > 0.0);
        CHECK(ex < prev);
        prev = ex;
    }
    // Widest tractable block for M = 2 holds 6 SNPs; wider blocks are charged in full.
    const double tail = 1.0 - [&] {
        double c = 0.0, term = std::exp(-p * D);
        for (int k = 0; k <= 6; ++k) {
            c += term;
            term *= p * D / (k + 1);
        }
        return c;
    }();
    CHECK(den_ml_upper_marginal(2, p, D, 10.0, L, 0.1, BoundMode::exact) == doctest::Approx(tail).epsilon(1e-6));
}

TEST_CASE("spectral quantities")
{
    auto q0 = spectral_quantities(100, 0.82, 0.0, NuMinMode::average_case);
    CHECK(q0.P_e == doctest::Approx(std::exp(-18.0 * 18.0 / 100.0)));
    CHECK(q0.a_lower + q0.b_upper == doctest::Approx(1.0));
    CHECK(q0.zeta > 0.0);
    auto qh = spectral_quantities(100, 0.82, 0.5, NuMinMode::average_case);
    CHECK(qh.P_e == 1.0);
    CHECK(qh.zeta == 0.0);
    auto qw = spectral_quantities(100, 0.82, 0.1, NuMinMode::worst_case);
    CHECK(qw.zeta == 0.0);
}

TEST_CASE("spectral noise threshold")
{
    CHECK(spectral_eps_threshold(100, 18.0) == doctest::Approx(0.16).epsilon(0.01));
    CHECK(spectral_eps_threshold(100, 1.0) < 0.0);
    CHECK(spectral_eps_threshold_asymptotic(100, 0.82) == doctest::Approx(spectral_eps_threshold(100, 18.0)));
    double prev = -1.0;
    for (int kappa : {50, 100, 400, 1600}) {
        double t = spectral_eps_threshold_asymptotic(kappa, 0.82);
        CHECK(t > prev);
        CHECK(t < 0.5);
        prev = t;
    }
}

TEST_CASE("average-case spectral bound is vacuous at quarter noise below 200 kbp")
{
    SpectralBoundOptions o;
    o.nu_mode = NuMinMode::average_case;
    for (double L : {5e4, 1e5, 1.5e5, 1.9e5})
        for (double depth : {43.0, 430.0}) {
            auto r = noisy_upper_spectral(noisy_cfg(3e9, L, depth, 0.25), std::nullopt, o);
            CHECK(r.bound == 1.0);
        }
}

TEST_CASE("worst-case spectral bound is always vacuous")
{
    for (double L : {1e5, 1e6})
        for (double eps : {0.05, 0.2}) {
            auto r = noisy_upper_spectral(noisy_cfg(3e9, L, 430, eps));
            CHECK(r.bound == 1.0);
        }
}

TEST_CASE("empty-block term adds the chance a block has no covering read")
{
    SpectralBoundOptions o;
    o.nu_mode = NuMinMode::average_case;
    const double L = 1.2e5, depth = 430;
    SegmentationPlan plan{L - 100, 5e3};
    ModelConfig c = noisy_cfg(3e9, L, depth, 0.1);
    o.empty_block_failure = false;
    auto without = noisy_upper_spectral(c, plan, o);
    o.empty_block_failure = true;
    auto with = noisy_upper_spectral(c, plan, o);
    const double cov = c.read_density_lambda * 2 * 100;
    CHECK(with.den_term - without.den_term == doctest::Approx(3e9 / 5e3 * std::exp(-cov)).epsilon(1e-9));
    CHECK(with.disc_term == without.disc_term);
}
