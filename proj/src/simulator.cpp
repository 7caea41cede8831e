#include "poolseq/simulator.hpp"

#include <algorithm>
#include <ostream>

#include "poolseq/error.hpp"

namespace poolseq {

namespace {

std::int8_t draw_categorical(const std::array<double, 4>& q, double u)
{
    double acc = 0.0;
    for (int b = 0; b < 3; ++b) {
        acc += q[b];
        if (u < acc) return static_cast<std::int8_t>(b);
    }
    return 3;
}

}  // namespace

Population generate_population(const ModelConfig& config, RandomStream& stream)
{
    config.validate();
    Population pop;
    pop.M = config.num_individuals_M;
    pop.law = config.allele_law;
    RandomStream pos_stream = stream.split(Role::positions);
    RandomStream allele_stream = stream.split(Role::alleles);
    pop.snp_positions = sample_poisson_positions(config.snp_rate_p, config.genome_length_G, pos_stream);
    const std::size_t S = pop.num_snps();
    pop.alleles.assign(static_cast<std::size_t>(pop.M) * S, 0);

    if (const auto* emp = std::get_if<Empirical>(&config.allele_law)) {
        pop.alphabet = Alphabet::quaternary;
        for (std::size_t s = 0; s < S; ++s) {
            const auto& q = emp->vectors[allele_stream.below(emp->vectors.size())];
            for (int m = 0; m < pop.M; ++m)
                pop.alleles[static_cast<std::size_t>(m) * S + s] = draw_categorical(q, allele_stream.uniform());
        }
        return pop;
    }

    pop.alphabet = Alphabet::biallelic;
    double f = 0.0;
    if (const auto* b = std::get_if<FixedBiallelic>(&config.allele_law))
        f = b->minor_frequency;
    else
        f = minor_frequency_for_eta(std::get<FixedEta>(config.allele_law).eta);
    for (std::size_t s = 0; s < S; ++s)
        for (int m = 0; m < pop.M; ++m)
            pop.alleles[static_cast<std::size_t>(m) * S + s] = allele_stream.uniform() < f ? 1 : -1;
    return pop;
}

ReadSet generate_reads(const Population& pop, const ModelConfig& config, RandomStream& stream)
{
    config.validate();
    ReadSet rs;
    rs.config = config;
    rs.num_snps = pop.num_snps();
    const double L = config.read_length_L;
    const double G = config.genome_length_G;
    const double lo = config.read_window == ReadWindow::overlapping ? -L : 0.0;
    const auto& pos = pop.snp_positions;

    std::vector<ReadRecord> all;
    for (int m = 0; m < pop.M; ++m) {
        RandomStream rstream = stream.split(static_cast<std::uint64_t>(Role::reads) * 1000003ULL + m);
        auto starts = sample_poisson_positions(config.read_density_lambda, G - lo, rstream);
        std::size_t first = 0, last = 0;
        for (double s0 : starts) {
            ReadRecord r;
            r.start = s0 + lo;
            r.hidden_individual = m;
            while (first < pos.size() && pos[first] < r.start) ++first;
            if (last < first) last = first;
            while (last < pos.size() && pos[last] < r.start + L) ++last;
            r.first_snp = static_cast<std::uint32_t>(first);
            r.n_snps = static_cast<std::uint32_t>(last - first);
            all.push_back(r);
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const ReadRecord& a, const ReadRecord& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.hidden_individual < b.hidden_individual;
    });

    std::size_t total = 0;
    for (const auto& r : all) total += r.n_snps;
    rs.allele_buffer.resize(total);
    std::size_t off = 0;
    for (auto& r : all) {
        r.allele_offset = off;
        const std::int8_t* src = pop.row(r.hidden_individual) + r.first_snp;
        std::copy(src, src + r.n_snps, rs.allele_buffer.begin() + static_cast<std::ptrdiff_t>(off));
        off += r.n_snps;
    }
    rs.reads = std::move(all);
    return rs;
}

ReadSet apply_noise(ReadSet rs, double eps, RandomStream& stream)
{
    if (!(eps >= 0.0 && eps <= 0.5)) throw ValidationError("eps must lie in [0,0.5]");
    if (eps > 0.0) {
        if (!is_biallelic(rs.config.allele_law))
            throw UnsupportedModel("noise is only modelled for biallelic populations");
        for (auto& a : rs.allele_buffer)
            if (stream.uniform() < eps) a = static_cast<std::int8_t>(-a);
    }
    rs.noisy = true;
    rs.config.noise_eps = eps;
    return rs;
}

std::vector<std::size_t> discriminating_indices(const Population& pop, int i, int j)
{
    require(i != j, "discriminating positions need two distinct individuals");
    require(i >= 0 && j >= 0 && i < pop.M && j < pop.M, "individual index out of range");
    std::vector<std::size_t> out;
    const std::int8_t* a = pop.row(i);
    const std::int8_t* b = pop.row(j);
    for (std::size_t s = 0; s < pop.num_snps(); ++s)
        if (a[s] != b[s]) out.push_back(s);
    return out;
}

std::vector<double> discriminating_positions(const Population& pop, int i, int j)
{
    std::vector<double> out;
    for (std::size_t s : discriminating_indices(pop, i, j)) out.push_back(pop.snp_positions[s]);
    return out;
}

double estimated_trial_bytes(const ModelConfig& c)
{
    const double M = c.num_individuals_M;
    const double snps = c.genome_length_G * c.snp_rate_p;
    const double reads = M * c.read_density_lambda * (c.genome_length_G + c.read_length_L);
    const double per_read = c.read_length_L * c.snp_rate_p;
    return snps * (8.0 + M) + reads * (sizeof(ReadRecord) + per_read) * 2.0;
}

void dump_text(std::ostream& os, const Population& pop, const ReadSet& rs)
{
    for (std::size_t s = 0; s < pop.num_snps(); ++s) {
        os << "SNP " << s << ' ' << pop.snp_positions[s];
        for (int m = 0; m < pop.M; ++m) os << ' ' << static_cast<int>(pop.allele(m, s));
        os << '\n';
    }
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs.reads[i];
        os << "READ " << r.start << ' ' << r.hidden_individual << ' ';
        auto obs = rs.observed(i);
        for (std::uint32_t k = 0; k < r.n_snps; ++k) {
            if (k) os << ',';
            os << (r.first_snp + k) << ':' << static_cast<int>(obs[k]);
        }
        os << '\n';
    }
}

}  // namespace poolseq
