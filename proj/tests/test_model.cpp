#include <doctest.h>

#include <cmath>
#include <vector>

#include "poolseq/error.hpp"
#include "poolseq/model.hpp"
#include "poolseq/stats.hpp"

using namespace poolseq;

TEST_CASE("eta of a 10% minor allele is 0.82")
{
    CHECK(eta_from_law(FixedBiallelic{0.1}).eta == doctest::Approx(0.82).epsilon(1e-15));
}

TEST_CASE("eta of the uniform quaternary law is one quarter")
{
    Empirical e{{{0.25, 0.25, 0.25, 0.25}}};
    CHECK(eta_from_law(e).eta == doctest::Approx(0.25));
}

TEST_CASE("degenerate allele gives eta one and no discriminating rate")
{
    EtaValue v = eta_from_law(FixedBiallelic{0.0});
    CHECK(v.eta == 1.0);
    CHECK(v.discriminating_rate(1e-3) == 0.0);
}

TEST_CASE("fixed eta passes through")
{
    CHECK(eta_from_law(FixedEta{0.6}).eta == 0.6);
}

TEST_CASE("empirical eta averages over loci")
{
    Empirical e{{{1, 0, 0, 0}, {0.5, 0.5, 0, 0}}};
    CHECK(eta_from_law(e).eta == doctest::Approx(0.75));
}

TEST_CASE("frequency vectors must sum to one")
{
    CHECK_THROWS_AS(eta_from_law(Empirical{{{0.5, 0.5, 0.1, 0}}}), ValidationError);
    CHECK_NOTHROW(eta_from_law(Empirical{{{0.5, 0.5 + 5e-10, 0, 0}}}));
    CHECK_THROWS_AS(eta_from_law(FixedBiallelic{1.5}), ValidationError);
}

TEST_CASE("eta is deterministic")
{
    Empirical e{{{0.1, 0.2, 0.3, 0.4}, {0.7, 0.1, 0.1, 0.1}}};
    CHECK(eta_from_law(e).eta == eta_from_law(e).eta);
}

TEST_CASE("minor frequency inverts eta")
{
    for (double f : {0.0, 0.05, 0.1, 0.3, 0.5}) {
        double eta = eta_from_law(FixedBiallelic{f}).eta;
        CHECK(minor_frequency_for_eta(eta) == doctest::Approx(f).epsilon(1e-9));
    }
    CHECK_THROWS_AS(minor_frequency_for_eta(0.3), ValidationError);
}

TEST_CASE("config validation")
{
    ModelConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = [&](auto mutate) {
        ModelConfig x;
        mutate(x);
        CHECK_THROWS_AS(x.validate(), ValidationError);
    };
    bad([](ModelConfig& x) { x.genome_length_G = 0; });
    bad([](ModelConfig& x) { x.genome_length_G = 10.5; });
    bad([](ModelConfig& x) { x.num_individuals_M = 0; });
    bad([](ModelConfig& x) { x.snp_rate_p = 1.0; });
    bad([](ModelConfig& x) { x.read_length_L = 0; });
    bad([](ModelConfig& x) { x.noise_eps = 0.51; });
    bad([](ModelConfig& x) { x.read_density_lambda = -1; });
    ModelConfig half;
    half.noise_eps = 0.5;
    CHECK_NOTHROW(half.validate());
}

TEST_CASE("zero rate gives no positions")
{
    RandomStream s(1);
    CHECK(sample_poisson_positions(0.0, 1e6, s).empty());
}

TEST_CASE("positions are strictly increasing inside the interval")
{
    RandomStream s(2);
    auto v = sample_poisson_positions(1e-2, 1e5, s);
    REQUIRE(!v.empty());
    CHECK(v.front() >= 0.0);
    CHECK(v.back() < 1e5);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
}

TEST_CASE("position counts are Poisson")
{
    std::vector<long> counts;
    for (int t = 0; t < 10000; ++t) {
        RandomStream s(3, t, Role::positions);
        counts.push_back(static_cast<long>(sample_poisson_positions(1e-3, 1e5, s).size()));
    }
    double mean = 0, var = 0;
    for (long c : counts) mean += c;
    mean /= counts.size();
    for (long c : counts) var += (c - mean) * (c - mean);
    var /= counts.size() - 1;
    CHECK(mean == doctest::Approx(100).epsilon(0.01));
    CHECK(var == doctest::Approx(100).epsilon(0.05));
    CHECK(poisson_gof(counts, 100).pvalue > 0.01);
}

TEST_CASE("thinned positions stay Poisson")
{
    std::vector<long> counts;
    for (int t = 0; t < 5000; ++t) {
        RandomStream s(4, t, Role::positions);
        auto v = sample_poisson_positions(1e-3, 1e5, s);
        long k = 0;
        for (std::size_t i = 0; i < v.size(); ++i) k += s.bernoulli(0.18);
        counts.push_back(k);
    }
    CHECK(poisson_gof(counts, 18).pvalue > 0.01);
}

TEST_CASE("gaps are exponential")
{
    RandomStream s(5);
    auto v = sample_poisson_positions(1e-3, 5e6, s);
    std::vector<double> gaps;
    for (std::size_t i = 1; i < v.size(); ++i) gaps.push_back(v[i] - v[i - 1]);
    CHECK(ks_exponential(gaps, 1e-3).pvalue > 0.01);
}

TEST_CASE("superposition of two processes matches one at the summed rate")
{
    std::vector<long> merged_counts, single_counts;
    std::vector<double> merged_gaps, single_gaps;
    for (int t = 0; t < 2000; ++t) {
        RandomStream a(6, t, Role::positions), b(6, t, Role::aux), c(7, t, Role::positions);
        auto x = sample_poisson_positions(3e-4, 1e5, a);
        auto y = sample_poisson_positions(7e-4, 1e5, b);
        x.insert(x.end(), y.begin(), y.end());
        std::sort(x.begin(), x.end());
        auto z = sample_poisson_positions(1e-3, 1e5, c);
        merged_counts.push_back(static_cast<long>(x.size()));
        single_counts.push_back(static_cast<long>(z.size()));
        if (t < 50) {
            for (std::size_t i = 1; i < x.size(); ++i) merged_gaps.push_back(x[i] - x[i - 1]);
            for (std::size_t i = 1; i < z.size(); ++i) single_gaps.push_back(z[i] - z[i - 1]);
        }
    }
    CHECK(poisson_gof(merged_counts, 100).pvalue > 0.01);
    CHECK(poisson_gof(single_counts, 100).pvalue > 0.01);
    CHECK(ks_two_sample(merged_gaps, single_gaps).pvalue > 0.01);
}
