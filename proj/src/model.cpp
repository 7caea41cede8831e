#include "poolseq/model.hpp"

#include <cmath>
#include <sstream>

#include "poolseq/error.hpp"

namespace poolseq {

namespace {

struct LawValidator {
    void operator()(const FixedBiallelic& b) const
    {
        if (!(b.minor_frequency >= 0.0 && b.minor_frequency <= 1.0))
            throw ValidationError("minor allele frequency must lie in [0,1]");
    }
    void operator()(const Empirical& e) const
    {
        if (e.vectors.empty()) throw ValidationError("empirical law needs at least one frequency vector");
        for (size_t i = 0; i < e.vectors.size(); ++i) {
            double s = 0.0;
            for (double q : e.vectors[i]) {
                if (!(q >= 0.0 && q <= 1.0))
                    throw ValidationError("frequency vector " + std::to_string(i) + " has an entry outside [0,1]");
                s += q;
            }
            if (std::fabs(s - 1.0) > 1e-9)
                throw ValidationError("frequency vector " + std::to_string(i) + " does not sum to 1");
        }
    }
    void operator()(const FixedEta& f) const
    {
        if (!(f.eta >= 0.0 && f.eta <= 1.0)) throw ValidationError("eta must lie in [0,1]");
    }
};

}  // namespace

void validate_law(const AlleleLaw& law)
{
    std::visit(LawValidator{}, law);
}

EtaValue eta_from_law(const AlleleLaw& law)
{
    validate_law(law);
    if (const auto* b = std::get_if<FixedBiallelic>(&law)) {
        double f = b->minor_frequency;
        return {f * f + (1.0 - f) * (1.0 - f)};
    }
    if (const auto* e = std::get_if<Empirical>(&law)) {
        double total = 0.0;
        for (const auto& q : e->vectors) {
            double s = 0.0;
            for (double x : q) s += x * x;
            total += s;
        }
        return {total / static_cast<double>(e->vectors.size())};
    }
    return {std::get<FixedEta>(law).eta};
}

bool is_biallelic(const AlleleLaw& law)
{
    return !std::holds_alternative<Empirical>(law);
}

double minor_frequency_for_eta(double eta)
{
    if (!(eta >= 0.5 && eta <= 1.0))
        throw ValidationError("a biallelic locus cannot realize eta=" + std::to_string(eta) + " (needs eta in [0.5,1])");
    return 0.5 * (1.0 - std::sqrt(2.0 * eta - 1.0));
}

std::string describe_law(const AlleleLaw& law)
{
    std::ostringstream os;
    if (const auto* b = std::get_if<FixedBiallelic>(&law))
        os << "maf=" << b->minor_frequency;
    else if (const auto* e = std::get_if<Empirical>(&law))
        os << "empirical[" << e->vectors.size() << "]";
    else
        os << "eta=" << std::get<FixedEta>(law).eta;
    return os.str();
}

std::string read_window_name(ReadWindow w)
{
    return w == ReadWindow::overlapping ? "overlapping" : "starts_in_genome";
}

void ModelConfig::validate() const
{
    if (!(genome_length_G >= 1.0) || !std::isfinite(genome_length_G) || std::floor(genome_length_G) != genome_length_G)
        throw ValidationError("G must be a positive integer number of base pairs");
    if (num_individuals_M < 1) throw ValidationError("M must be at least 1");
    if (!(snp_rate_p >= 0.0 && snp_rate_p < 1.0)) throw ValidationError("p must lie in [0,1)");
    if (!(read_length_L > 0.0) || !std::isfinite(read_length_L)) throw ValidationError("L must be positive");
    if (!(read_density_lambda >= 0.0) || !std::isfinite(read_density_lambda))
        throw ValidationError("lambda must be a finite non-negative rate");
    if (!std::isfinite(read_density_lambda * read_length_L)) throw ValidationError("lambda*L must be finite");
    if (!(noise_eps >= 0.0 && noise_eps <= 0.5)) throw ValidationError("eps must lie in [0,0.5]");
    validate_law(allele_law);
}

double ModelConfig::eta() const
{
    return eta_from_law(allele_law).eta;
}

double ModelConfig::discriminating_rate() const
{
    return snp_rate_p * (1.0 - eta());
}

std::vector<double> sample_poisson_positions(double rate, double length, RandomStream& stream)
{
    std::vector<double> out;
    if (!(rate > 0.0) || !(length > 0.0)) return out;
    out.reserve(static_cast<size_t>(rate * length * 1.1 + 16));
    double x = stream.exponential(rate);
    while (x < length) {
        if (out.empty() || x > out.back()) out.push_back(x);
        x += stream.exponential(rate);
    }
    return out;
}

}  // namespace poolseq
