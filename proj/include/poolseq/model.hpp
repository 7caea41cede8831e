#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "poolseq/random.hpp"

namespace poolseq {

struct FixedBiallelic {
    double minor_frequency = 0.1;
};

// One frequency vector per SNP over {A,C,G,T}; sampling draws a vector per SNP.
struct Empirical {
    std::vector<std::array<double, 4>> vectors;
};

struct FixedEta {
    double eta = 0.82;
};

using AlleleLaw = std::variant<FixedBiallelic, Empirical, FixedEta>;

struct EtaValue {
    double eta = 1.0;
    double discriminating_rate(double p) const { return p * (1.0 - eta); }
};

// Where read start positions may fall. `overlapping` lets reads start up to L
// before the genome so every position sees the same coverage law.
enum class ReadWindow { overlapping, starts_in_genome };

struct ModelConfig {
    double genome_length_G = 1e6;
    int num_individuals_M = 2;
    double snp_rate_p = 1e-3;
    double read_length_L = 1e4;
    double read_density_lambda = 1e-2;
    double noise_eps = 0.0;
    AlleleLaw allele_law = FixedBiallelic{};
    ReadWindow read_window = ReadWindow::overlapping;

    void validate() const;
    double eta() const;
    double discriminating_rate() const;
};

void validate_law(const AlleleLaw& law);
EtaValue eta_from_law(const AlleleLaw& law);

// Biallelic laws are stored as -1 (major) / +1 (minor); otherwise 2-bit codes.
bool is_biallelic(const AlleleLaw& law);

// Minor-allele frequency realizing a given eta for a biallelic locus.
double minor_frequency_for_eta(double eta);

std::string describe_law(const AlleleLaw& law);
std::string read_window_name(ReadWindow w);

std::vector<double> sample_poisson_positions(double rate, double length, RandomStream& stream);

}  // namespace poolseq
