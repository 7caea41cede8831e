#include "poolseq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poolseq/error.hpp"

namespace poolseq {

namespace {

double log_hypotheses(int kappa, int M)
{
    const double n = std::ldexp(1.0, kappa);
    if (n < M) return -1.0;
    return std::lgamma(n + 1.0) - std::lgamma(M + 1.0) - std::lgamma(n - M + 1.0);
}

HypothesisSet denoise_one(const DenoiseBlock& b, const NoisyAssemblyOptions& opt, RandomStream& stream,
                          NoisyAssemblyResult& res)
{
    bool use_ml = opt.method == DenoiseMethod::ml;
    if (opt.method == DenoiseMethod::automatic)
        use_ml = b.kappa <= 40 && log_hypotheses(b.kappa, b.M) <= std::log(opt.ml_hypothesis_cap);
    if (use_ml) {
        ++res.ml_blocks;
        return ml_denoise(b);
    }
    ++res.spectral_blocks;
    return spectral_denoise(b, opt.spectral, stream).hypothesis;
}

}  // namespace

DenoiseBlock extract_block(const ReadSet& rs, std::size_t first_snp, int kappa, double window_start,
                           double window_end)
{
    DenoiseBlock b;
    b.kappa = kappa;
    b.window_start = window_start;
    b.window_end = window_end;
    b.M = rs.config.num_individuals_M;
    b.eps = rs.config.noise_eps;
    const double L = rs.config.read_length_L;
    auto lo = std::lower_bound(rs.reads.begin(), rs.reads.end(), window_end - L,
                               [](const ReadRecord& r, double v) { return r.start < v; });
    const std::size_t last = first_snp + static_cast<std::size_t>(kappa);
    for (auto it = lo; it != rs.reads.end() && it->start <= window_start; ++it) {
        const auto& r = *it;
        if (r.first_snp > first_snp || r.first_snp + r.n_snps < last) continue;
        const std::int8_t* src = rs.allele_buffer.data() + r.allele_offset + (first_snp - r.first_snp);
        b.observations.insert(b.observations.end(), src, src + kappa);
        ++b.n;
    }
    return b;
}

NoisyAssemblyResult noisy_assemble(const ReadSet& rs, const std::vector<double>& pos, int M,
                                   const NoisyAssemblyOptions& opt, RandomStream& stream)
{
    validate_plan(opt.plan, rs.config.read_length_L);
    require(pos.size() == rs.num_snps, "SNP positions must match the read set");
    require(M >= 1 && M <= 8, "noisy assembly supports 1 <= M <= 8");
    const std::size_t S = pos.size();
    NoisyAssemblyResult res;
    res.sequences.assign(static_cast<std::size_t>(M) * S, kUnknown);
    auto at = [&](int m, std::size_t s) -> std::int8_t& { return res.sequences[static_cast<std::size_t>(m) * S + s]; };

    const double G = rs.config.genome_length_G;
    const double D = opt.plan.D, d = opt.plan.d;
    std::size_t filled_to = 0;
    bool failed = false;
    std::vector<int> perm(static_cast<std::size_t>(M)), chosen;

    for (long k = 0; !failed; ++k) {
        const double ws = static_cast<double>(k) * d;
        if (ws >= G) break;
        const double we = ws + D;
        const auto a = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), ws) - pos.begin());
        const auto b = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), we) - pos.begin());
        ++res.blocks;
        if (b <= a) {
            ++res.empty_blocks;
        } else if (b > filled_to) {
            DenoiseBlock blk = extract_block(rs, a, static_cast<int>(b - a), ws, we);
            blk.M = M;
            if (blk.n < M) {
                ++res.starved_blocks;
                failed = true;
                break;
            }
            RandomStream bs = stream.split(static_cast<std::uint64_t>(k) + 1);
            HypothesisSet h = denoise_one(blk, opt, bs, res);
            std::iota(perm.begin(), perm.end(), 0);
            int matches = 0;
            // The first block fixes the labels.
            if (filled_to == 0) {
                matches = 1;
                chosen = perm;
            } else do {
                bool ok = true;
                for (int m = 0; m < M && ok; ++m)
                    for (std::size_t s = a; s < std::min(b, filled_to) && ok; ++s)
                        ok = at(m, s) == h.sequences[static_cast<std::size_t>(perm[m])][s - a];
                if (ok) {
                    if (++matches == 1) chosen = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            if (matches != 1 && M > 1) {
                ++res.ambiguous_stitches;
                failed = true;
                break;
            }
            if (matches == 0) chosen = perm;
            for (int m = 0; m < M; ++m)
                for (std::size_t s = std::max(a, filled_to); s < b; ++s)
                    at(m, s) = h.sequences[static_cast<std::size_t>(chosen[m])][s - a];
            filled_to = b;
        }
        if (we >= G) break;
    }
    res.complete = !failed && filled_to == S;
    return res;
}

bool score_sequences(const std::vector<std::int8_t>& seq, const Population& pop)
{
    const std::size_t S = pop.num_snps();
    const int M = pop.M;
    if (seq.size() != static_cast<std::size_t>(M) * S) return false;
    if (std::find(seq.begin(), seq.end(), kUnknown) != seq.end()) return false;
    std::vector<std::vector<std::int8_t>> got, truth;
    for (int m = 0; m < M; ++m) {
        got.emplace_back(seq.begin() + static_cast<std::ptrdiff_t>(m * S),
                         seq.begin() + static_cast<std::ptrdiff_t>((m + 1) * S));
        truth.emplace_back(pop.row(m), pop.row(m) + S);
    }
    std::sort(got.begin(), got.end());
    std::sort(truth.begin(), truth.end());
    return got == truth;
}

TrialOutcome run_trial(const ModelConfig& config, std::uint64_t seed, std::uint64_t trial, const TrialOptions& opt)
{
    TrialOutcome out;
    out.trial = trial;
    RandomStream base(seed, trial, Role::truth);
    RandomStream ps = base.split(Role::positions);
    Population pop = generate_population(config, ps);
    RandomStream rstream = base.split(Role::reads);
    ReadSet rs = generate_reads(pop, config, rstream);
    out.num_snps = pop.num_snps();
    out.num_reads = rs.size();
    ConditionReport cond = check_conditions(pop, rs);
    out.coverage_fail = !cond.coverage_ok;
    out.bridging_fail = !cond.bridging_ok;
    const int M = config.num_individuals_M;

    if (config.noise_eps <= 0.0) {
        RandomStream ts = base.split(Role::tiebreak);
        AssemblyResult ar = greedy_assemble(rs, M, ts);
        out.greedy_fail = !score_assembly(ar.contigs, pop, rs);
        out.failure = out.greedy_fail;
        return out;
    }
    RandomStream ns = base.split(Role::noise);
    ReadSet noisy = apply_noise(std::move(rs), config.noise_eps, ns);
    NoisyAssemblyOptions nopt;
    nopt.plan = opt.plan ? *opt.plan : noisy_upper_ml(config).plan;
    nopt.method = opt.method;
    nopt.ml_hypothesis_cap = opt.ml_hypothesis_cap;
    nopt.spectral.mode = opt.nu_mode;
    nopt.spectral.eta = config.eta();
    RandomStream ds = base.split(Role::denoise);
    NoisyAssemblyResult nr = noisy_assemble(noisy, pop.snp_positions, M, nopt, ds);
    out.denoise_fail = !(nr.complete && score_sequences(nr.sequences, pop));
    out.failure = out.denoise_fail;
    return out;
}

}  // namespace poolseq

namespace poolseq {

PlantedBlock planted_block(int M, int kappa, double f, double eps, int n, RandomStream& stream)
{
    require(M >= 1 && kappa >= 1 && n >= 0, "planted block needs M >= 1, kappa >= 1, n >= 0");
    require(kappa >= 63 || std::ldexp(1.0, kappa) >= M, "too few patterns for M distinct truths");
    PlantedBlock pb;
    auto& seqs = pb.truth.sequences;
    while (static_cast<int>(seqs.size()) < M) {
        std::vector<std::int8_t> v(static_cast<std::size_t>(kappa));
        for (auto& x : v) x = stream.bernoulli(f) ? 1 : -1;
        if (std::find(seqs.begin(), seqs.end(), v) == seqs.end()) seqs.push_back(std::move(v));
    }
    DenoiseBlock& b = pb.block;
    b.kappa = kappa;
    b.n = n;
    b.M = M;
    b.eps = eps;
    b.window_end = kappa;
    b.observations.resize(static_cast<std::size_t>(n) * kappa);
    pb.sources.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int src = static_cast<int>(stream.below(static_cast<std::uint64_t>(M)));
        pb.sources[static_cast<std::size_t>(i)] = src;
        for (int k = 0; k < kappa; ++k) {
            std::int8_t a = seqs[static_cast<std::size_t>(src)][static_cast<std::size_t>(k)];
            if (stream.bernoulli(eps)) a = static_cast<std::int8_t>(-a);
            b.observations[static_cast<std::size_t>(i) * kappa + k] = a;
        }
    }
    return pb;
}

BenchResult denoise_bench(int M, int kappa, double f, double eps, int n, double coverage, DenoiseMethod method,
                          const SpectralOptions& spectral, long trials, std::uint64_t seed, long first_trial)
{
    BenchResult r;
    r.trials = trials;
    for (long t = first_trial; t < first_trial + trials; ++t) {
        RandomStream s(seed, static_cast<std::uint64_t>(t), Role::denoise);
        const int rows = n >= 0 ? n : static_cast<int>(s.poisson(coverage));
        PlantedBlock pb = planted_block(M, kappa, f, eps, rows, s);
        try {
            if (method == DenoiseMethod::spectral) {
                if (rows < M) {
                    ++r.indeterminate;
                    continue;
                }
                SpectralResult sr = spectral_denoise(pb.block, spectral, s);
                if (sr.degraded) ++r.degraded;
                if (sr.hypothesis.same_as(pb.truth)) ++r.successes;
            } else {
                if (ml_denoise(pb.block).same_as(pb.truth)) ++r.successes;
            }
        } catch (const IndeterminateError&) {
            ++r.indeterminate;
        } catch (const CapacityError&) {
            ++r.capacity_refusals;
        }
    }
    return r;
}

}  // namespace poolseq
