#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "poolseq/assembler.hpp"
#include "poolseq/error.hpp"
#include "poolseq/exact_bridging.hpp"
#include "poolseq/noiseless_bounds.hpp"
#include "poolseq/stats.hpp"

using namespace poolseq;

namespace {

constexpr double kP = 1e-3, kEta = 0.82, kR = kP * (1 - kEta);

// Failure probability of one chain step by direct quadrature.
double fail_quadrature(double d, double ell, double lambda)
{
    const int n = 20000;
    const double h = ell / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = i * h;
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * kR * std::exp(-kR * x) * std::exp(-2 * lambda * (d + ell - x));
    }
    return std::exp(-kR * ell) + s * h / 3.0;
}

}  // namespace

TEST_CASE("fresh-stretch step failure is P_2 over the whole stretch")
{
    for (double d : {0.0, 500.0})
        for (double ell : {100.0, 3000.0})
            CHECK(p_fail_step(d, ell, 1e-3, kP, kEta) == p_m(2, 1e-3, kP, kEta, d + ell));
}

TEST_CASE("exact step failure matches quadrature")
{
    for (double lambda : {1e-4, 9e-5, 1e-3})
        for (double d : {0.0, 200.0, 4000.0})
            for (double ell : {10.0, 1000.0, 20000.0})
                CHECK(p_fail_step_exact(d, ell, lambda, kP, kEta) ==
                      doctest::Approx(fail_quadrature(d, ell, lambda)).epsilon(1e-8));
}

TEST_CASE("exact step failure with no known gap is P_2")
{
    for (double ell : {100.0, 5000.0, 30000.0})
        CHECK(p_fail_step_exact(0.0, ell, 1e-3, kP, kEta) ==
              doctest::Approx(p_m(2, 1e-3, kP, kEta, ell)).epsilon(1e-10));
}

TEST_CASE("sampled step failures follow the step laws")
{
    const double lambda = 1e-4, L = 8000;
    const ChainState st{1500.0, 4000.0, 3};
    for (auto kernel : {ChainKernel::exact, ChainKernel::fresh_stretch}) {
        const double expected = kernel == ChainKernel::exact ? p_fail_step_exact(st.d, st.ell, lambda, kP, kEta)
                                                             : p_fail_step(st.d, st.ell, lambda, kP, kEta);
        RandomStream s(41);
        const int n = 40000;
        int fails = 0;
        for (int i = 0; i < n; ++i) {
            auto nx = sample_transition(st, lambda, kP, kEta, L, s, kernel);
            if (!nx) {
                ++fails;
                continue;
            }
            CHECK(nx->step == 4);
            CHECK(nx->d >= 0.0);
            CHECK(nx->d < st.ell + st.d);
            CHECK(nx->ell <= L);
            CHECK(nx->ell > L - st.d - st.ell);
        }
        const double sigma = std::sqrt(expected * (1 - expected) / n);
        CHECK(std::fabs(static_cast<double>(fails) / n - expected) < 4 * sigma);
    }
}

TEST_CASE("gap law of surviving exact steps")
{
    const double lambda = 1e-3, L = 8000;
    const ChainState st{0.0, 5000.0, 0};
    RandomStream s(42);
    std::vector<double> xs;
    for (int i = 0; i < 4000; ++i)
        if (auto nx = sample_transition(st, lambda, kP, kEta, L, s)) xs.push_back(nx->d);
    REQUIRE(xs.size() > 500);
    auto mass = [&](double hi) {
        const int n = 4000;
        double h = hi / n, t = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = (i + 0.5) * h;
            t += kR * std::exp(-kR * x) * -std::expm1(-2 * lambda * (st.ell - x));
        }
        return t * h;
    };
    const double total = mass(st.ell);
    for (double q : {1000.0, 2500.0, 4000.0}) {
        double emp = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x < q; })) / xs.size();
        double want = mass(q) / total;
        CHECK(std::fabs(emp - want) < 4 * std::sqrt(want * (1 - want) / xs.size()));
    }
}

TEST_CASE("span law")
{
    const double G = 2e4, rate = 2e-4;
    RandomStream s(43);
    std::vector<double> u;
    for (int i = 0; i < 3000; ++i) {
        double LR = sample_span(G, rate, s);
        CHECK(LR >= 0.0);
        CHECK(LR <= G);
        u.push_back(G - LR);
    }
    std::sort(u.begin(), u.end());
    const double x = G * rate, Z = -std::expm1(-x) - x * std::exp(-x);
    double dmax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double F = (-std::expm1(-rate * u[i]) - rate * u[i] * std::exp(-rate * u[i])) / Z;
        double n = static_cast<double>(u.size());
        dmax = std::max({dmax, std::fabs(F - i / n), std::fabs(F - (i + 1) / n)});
    }
    double n = static_cast<double>(u.size());
    CHECK(kolmogorov_pvalue((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax) > 0.01);
}

TEST_CASE("no discriminating SNPs means no bridging failure")
{
    auto e = estimate_bridging(1e5, 1e4, 1e-2, kP, 1.0, 100, 1);
    CHECK(e.estimate == 0.0);
    CHECK(e.prefactor == 0.0);
}

TEST_CASE("chain estimates split over trial ranges add up")
{
    auto whole = estimate_bridging(2e5, 3e4, 1e-2, kP, kEta, 400, 9);
    auto a = estimate_bridging(2e5, 3e4, 1e-2, kP, kEta, 150, 9, ChainKernel::exact, 0);
    auto b = estimate_bridging(2e5, 3e4, 1e-2, kP, kEta, 250, 9, ChainKernel::exact, 150);
    CHECK(whole.failures == a.failures + b.failures);
    CHECK(whole.prefactor == a.prefactor);
    CHECK(whole.ci_low <= whole.estimate);
    CHECK(whole.estimate <= whole.ci_high);
}

TEST_CASE("chain estimate sits inside the bridging sandwich and agrees with direct simulation")
{
    const double G = 2e5, L = 3e4, lambda = 1e-2;
    const int n = 3000;
    auto chain = estimate_bridging(G, L, lambda, kP, kEta, n, 17);
    auto b = bridging_bounds(2, G, kP, kEta, lambda, L);
    const double sigma = wilson_sigma(static_cast<double>(chain.failures), n) * chain.prefactor;
    CHECK(chain.estimate >= b.lower - 3 * sigma);
    CHECK(chain.estimate <= b.upper + 3 * sigma);

    ModelConfig c;
    c.genome_length_G = G;
    c.num_individuals_M = 2;
    c.snp_rate_p = kP;
    c.allele_law = FixedEta{kEta};
    c.read_length_L = L;
    c.read_density_lambda = lambda;
    int fails = 0;
    for (int t = 0; t < n; ++t) {
        RandomStream s(18, static_cast<std::uint64_t>(t), Role::truth);
        auto pop = generate_population(c, s);
        auto rs = generate_reads(pop, c, s);
        fails += !check_bridging(pop, rs).bridging_ok;
    }
    Interval direct = wilson_interval(fails, n);
    CHECK(direct.high >= chain.ci_low);
    CHECK(direct.low <= chain.ci_high);
}

TEST_CASE("bridging estimate rejects empty runs")
{
    CHECK_THROWS_AS(estimate_bridging(1e5, 1e4, 1e-2, kP, kEta, 0, 1), ContractViolation);
}
