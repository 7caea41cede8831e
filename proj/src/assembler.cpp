#include "poolseq/assembler.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "poolseq/error.hpp"

namespace poolseq {

ConditionReport check_coverage(const Population& pop, const ReadSet& rs)
{
    ConditionReport rep;
    const std::size_t S = pop.num_snps();
    std::vector<std::size_t> next(static_cast<std::size_t>(pop.M), 0);
    auto flag = [&](int m, std::size_t from, std::size_t to) {
        for (std::size_t s = from; s < to; ++s) rep.coverage_violations.push_back({m, s});
    };
    for (const auto& r : rs.reads) {
        if (r.n_snps == 0) continue;
        auto m = static_cast<std::size_t>(r.hidden_individual);
        if (r.first_snp > next[m]) flag(r.hidden_individual, next[m], r.first_snp);
        next[m] = std::max<std::size_t>(next[m], r.first_snp + r.n_snps);
    }
    for (int m = 0; m < pop.M; ++m) flag(m, next[static_cast<std::size_t>(m)], S);
    std::sort(rep.coverage_violations.begin(), rep.coverage_violations.end(),
              [](const CoverageViolation& a, const CoverageViolation& b) {
                  return a.individual != b.individual ? a.individual < b.individual : a.snp < b.snp;
              });
    rep.coverage_ok = rep.coverage_violations.empty();
    return rep;
}

ConditionReport check_bridging(const Population& pop, const ReadSet& rs)
{
    ConditionReport rep;
    const std::size_t S = pop.num_snps();
    const double L = rs.config.read_length_L;
    const double none = -std::numeric_limits<double>::infinity();
    // last_start[m*S+s]: latest start of a read of m at or before SNP s.
    std::vector<double> last_start(static_cast<std::size_t>(pop.M) * S, none);
    for (int m = 0; m < pop.M; ++m) {
        double* ls = last_start.data() + static_cast<std::size_t>(m) * S;
        std::size_t s = 0;
        double cur = none;
        for (const auto& r : rs.reads) {
            if (r.hidden_individual != m) continue;
            while (s < S && pop.snp_positions[s] < r.start) ls[s++] = cur;
            cur = r.start;
        }
        while (s < S) ls[s++] = cur;
    }
    for (int i = 0; i < pop.M; ++i) {
        for (int j = i + 1; j < pop.M; ++j) {
            auto disc = discriminating_indices(pop, i, j);
            const double* li = last_start.data() + static_cast<std::size_t>(i) * S;
            const double* lj = last_start.data() + static_cast<std::size_t>(j) * S;
            for (std::size_t k = 0; k + 1 < disc.size(); ++k) {
                std::size_t a = disc[k], b = disc[k + 1];
                double st = std::max(li[a], lj[a]);
                if (!(st + L > pop.snp_positions[b]))
                    rep.bridging_violations.push_back({i, j, pop.snp_positions[a], pop.snp_positions[b]});
            }
        }
    }
    rep.bridging_ok = rep.bridging_violations.empty();
    return rep;
}

ConditionReport check_conditions(const Population& pop, const ReadSet& rs)
{
    ConditionReport rep = check_coverage(pop, rs);
    ConditionReport b = check_bridging(pop, rs);
    rep.bridging_ok = b.bridging_ok;
    rep.bridging_violations = std::move(b.bridging_violations);
    return rep;
}

bool Contig::complete() const
{
    return std::none_of(consensus.begin(), consensus.end(), [](std::int8_t a) { return a == kUnknown; });
}

namespace {

struct Fit {
    std::uint32_t overlap = 0;
    std::uint32_t conflicts = 0;
};

Fit fit(const Contig& c, const ReadRecord& r, std::span<const std::int8_t> obs)
{
    Fit f;
    const std::int8_t* cons = c.consensus.data() + r.first_snp;
    for (std::uint32_t k = 0; k < r.n_snps; ++k) {
        if (cons[k] == kUnknown) continue;
        ++f.overlap;
        if (cons[k] != obs[k]) ++f.conflicts;
    }
    return f;
}

}  // namespace

AssemblyResult greedy_assemble(const ReadSet& rs, int M, RandomStream& stream)
{
    require(M >= 1, "greedy assembly needs M >= 1");
    AssemblyResult out;
    const std::size_t S = rs.num_snps;
    out.contigs.resize(static_cast<std::size_t>(M));
    for (auto& c : out.contigs) c.consensus.assign(S, kUnknown);

    std::vector<std::size_t> best;
    std::vector<Fit> fits(static_cast<std::size_t>(M));
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs.reads[i];
        auto obs = rs.observed(i);
        bool any_consistent = false;
        for (std::size_t c = 0; c < fits.size(); ++c) {
            fits[c] = fit(out.contigs[c], r, obs);
            any_consistent |= fits[c].conflicts == 0;
        }
        best.clear();
        std::uint32_t top = 0;
        for (std::size_t c = 0; c < fits.size(); ++c) {
            if (any_consistent && fits[c].conflicts != 0) continue;
            if (best.empty() || fits[c].overlap > top) {
                best.assign(1, c);
                top = fits[c].overlap;
            } else if (fits[c].overlap == top) {
                best.push_back(c);
            }
        }
        if (!any_consistent) ++out.inconsistent_merges;
        std::size_t pick = best[0];
        if (best.size() > 1) {
            pick = best[stream.below(best.size())];
            ++out.random_ties;
        }
        Contig& target = out.contigs[pick];
        target.assigned_reads.push_back(static_cast<std::uint32_t>(i));
        std::int8_t* cons = target.consensus.data() + r.first_snp;
        for (std::uint32_t k = 0; k < r.n_snps; ++k)
            if (cons[k] == kUnknown) cons[k] = obs[k];
    }

    // A position left unknown in a contig is completed when exactly one allele
    // is offered by the reads covering it that agree with that contig.
    for (auto& c : out.contigs) {
        std::vector<std::int8_t> seen(S, kUnknown);
        std::vector<std::uint8_t> ambiguous(S, 0);
        bool has_gap = !c.complete();
        if (!has_gap) continue;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const auto& r = rs.reads[i];
            auto obs = rs.observed(i);
            if (fit(c, r, obs).conflicts != 0) continue;
            for (std::uint32_t k = 0; k < r.n_snps; ++k) {
                std::size_t s = r.first_snp + k;
                if (c.consensus[s] != kUnknown) continue;
                if (seen[s] == kUnknown)
                    seen[s] = obs[k];
                else if (seen[s] != obs[k])
                    ambiguous[s] = 1;
            }
        }
        for (std::size_t s = 0; s < S; ++s) {
            if (c.consensus[s] == kUnknown && seen[s] != kUnknown && !ambiguous[s]) {
                c.consensus[s] = seen[s];
                ++out.filled_after_pass;
            }
        }
    }
    return out;
}

bool score_assembly(const std::vector<Contig>& contigs, const Population& pop, const ReadSet& rs)
{
    if (contigs.size() != static_cast<std::size_t>(pop.M)) return false;
    if (!check_coverage(pop, rs).coverage_ok) return false;
    const std::size_t S = pop.num_snps();
    std::vector<std::vector<std::int8_t>> got, want;
    for (const auto& c : contigs) {
        if (c.consensus.size() != S || !c.complete()) return false;
        got.push_back(c.consensus);
    }
    for (int m = 0; m < pop.M; ++m) want.emplace_back(pop.row(m), pop.row(m) + S);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    return got == want;
}

UniquenessResult enumerate_assemblies(const ReadSet& rs, const Population& truth, std::size_t state_cap)
{
    using State = std::vector<std::vector<std::int8_t>>;
    UniquenessResult res;
    const std::size_t S = rs.num_snps;
    const auto M = static_cast<std::size_t>(truth.M);
    auto canon = [](State s) {
        std::sort(s.begin(), s.end());
        return s;
    };
    std::set<State> frontier{canon(State(M, std::vector<std::int8_t>(S, kUnknown)))};
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs.reads[i];
        auto obs = rs.observed(i);
        std::set<State> next;
        for (const auto& st : frontier) {
            for (std::size_t c = 0; c < M; ++c) {
                if (c > 0 && st[c] == st[c - 1]) continue;
                bool ok = true;
                for (std::uint32_t k = 0; k < r.n_snps && ok; ++k) {
                    std::int8_t a = st[c][r.first_snp + k];
                    ok = a == kUnknown || a == obs[k];
                }
                if (!ok) continue;
                State ns = st;
                for (std::uint32_t k = 0; k < r.n_snps; ++k) ns[c][r.first_snp + k] = obs[k];
                next.insert(canon(std::move(ns)));
                if (next.size() > state_cap) {
                    res.exhausted = true;
                    return res;
                }
            }
        }
        frontier = std::move(next);
    }
    State want;
    for (std::size_t m = 0; m < M; ++m) want.emplace_back(truth.row(static_cast<int>(m)), truth.row(static_cast<int>(m)) + S);
    want = canon(want);
    for (const auto& st : frontier) {
        bool full = std::all_of(st.begin(), st.end(), [](const auto& row) {
            return std::none_of(row.begin(), row.end(), [](std::int8_t a) { return a == kUnknown; });
        });
        if (!full) continue;
        ++res.assemblies;
        if (st == want) res.contains_truth = true;
    }
    return res;
}

}  // namespace poolseq
