#include "poolseq/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "poolseq/error.hpp"
#include "poolseq/kernels.hpp"

namespace poolseq {

bool HypothesisSet::distinct() const
{
    auto s = sequences;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
}

bool HypothesisSet::same_as(const HypothesisSet& other) const
{
    auto a = sequences, b = other.sequences;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::uint64_t encode_pattern(const std::int8_t* v, int kappa)
{
    require(kappa <= 64, "pattern codes hold at most 64 SNPs");
    std::uint64_t c = 0;
    for (int k = 0; k < kappa; ++k)
        if (v[k] > 0) c |= std::uint64_t{1} << k;
    return c;
}

std::vector<std::int8_t> decode_pattern(std::uint64_t code, int kappa)
{
    std::vector<std::int8_t> v(static_cast<std::size_t>(kappa));
    for (int k = 0; k < kappa; ++k) v[static_cast<std::size_t>(k)] = (code >> k & 1U) ? 1 : -1;
    return v;
}

HypothesisSet hypothesis_from_codes(const std::vector<std::uint64_t>& codes, int kappa)
{
    HypothesisSet h;
    for (auto c : codes) h.sequences.push_back(decode_pattern(c, kappa));
    return h;
}

std::vector<std::uint64_t> codes_of(const HypothesisSet& h)
{
    std::vector<std::uint64_t> out;
    for (const auto& s : h.sequences) out.push_back(encode_pattern(s.data(), static_cast<int>(s.size())));
    return out;
}

double observation_likelihood(const std::vector<std::int8_t>& phi, const HypothesisSet& psi, double eps)
{
    require(eps < 1.0, "observation likelihood needs eps < 1");
    require(psi.M() >= 1, "empty hypothesis");
    const auto kappa = static_cast<int>(phi.size());
    double s = 0.0;
    for (const auto& v : psi.sequences) {
        require(static_cast<int>(v.size()) == kappa, "hypothesis length mismatch");
        int rho = 0;
        for (int k = 0; k < kappa; ++k) rho += phi[static_cast<std::size_t>(k)] != v[static_cast<std::size_t>(k)];
        s += std::pow(eps, rho) * std::pow(1.0 - eps, kappa - rho);
    }
    return s / psi.M();
}

double block_log_likelihood(const DenoiseBlock& block, const HypothesisSet& psi)
{
    double ll = 0.0;
    for (int i = 0; i < block.n; ++i) {
        std::vector<std::int8_t> phi(block.row(i), block.row(i) + block.kappa);
        ll += std::log(observation_likelihood(phi, psi, block.eps));
    }
    return ll;
}

namespace {

double log_binomial(double n, double k)
{
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

struct MlSearch {
    int M;
    std::uint64_t V;
    std::size_t u;
    const std::vector<double>* W;
    const std::vector<double>* counts;
    std::vector<std::vector<double>> partial;
    std::vector<std::uint64_t> pick;
    std::vector<std::uint64_t> best;
    double best_ll = -std::numeric_limits<double>::infinity();
    bool have = false;

    void leaf()
    {
        const auto& s = partial[static_cast<std::size_t>(M)];
        double ll = 0.0;
        for (std::size_t j = 0; j < u; ++j) ll += (*counts)[j] * std::log(s[j]);
        bool better = !have;
        if (have) better = std::isinf(best_ll) ? ll > best_ll : ll > best_ll + 1e-12 * std::max(1.0, std::fabs(best_ll));
        if (better) {
            best_ll = ll;
            best = pick;
            have = true;
        }
    }

    void descend(int depth, std::uint64_t from)
    {
        if (depth == M) {
            leaf();
            return;
        }
        const auto& prev = partial[static_cast<std::size_t>(depth)];
        auto& cur = partial[static_cast<std::size_t>(depth) + 1];
        for (std::uint64_t v = from; v + static_cast<std::uint64_t>(M - depth) <= V; ++v) {
            const double* w = W->data() + v * u;
            for (std::size_t j = 0; j < u; ++j) cur[j] = prev[j] + w[j];
            pick[static_cast<std::size_t>(depth)] = v;
            descend(depth + 1, v + 1);
        }
    }
};

}  // namespace

HypothesisSet ml_denoise(const DenoiseBlock& block)
{
    const int M = block.M, kappa = block.kappa;
    require(M >= 1, "ML denoising needs M >= 1");
    if (block.n == 0) throw IndeterminateError("ML denoising of a block with no observations is indeterminate");
    if (kappa > 40) throw CapacityError("ML enumeration over 2^" + std::to_string(kappa) + " sequences refused");
    const std::uint64_t V = std::uint64_t{1} << kappa;
    if (static_cast<std::uint64_t>(M) > V)
        throw ValidationError("cannot place " + std::to_string(M) + " distinct sequences on " + std::to_string(kappa) +
                              " SNPs");
    if (log_binomial(static_cast<double>(V), M) > std::log(kMlEnumerationCap))
        throw CapacityError("ML enumeration C(2^" + std::to_string(kappa) + "," + std::to_string(M) +
                            ") exceeds the 1e7 hypothesis cap");

    std::map<std::uint64_t, double> hist;
    for (int i = 0; i < block.n; ++i) hist[encode_pattern(block.row(i), kappa)] += 1.0;
    std::vector<std::uint64_t> patterns;
    std::vector<double> counts;
    for (auto [c, k] : hist) {
        patterns.push_back(c);
        counts.push_back(k);
    }
    const std::size_t u = patterns.size();
    if (static_cast<double>(V) * static_cast<double>(u) > 2e8)
        throw CapacityError("ML likelihood table too large");

    const double eps = block.eps;
    std::vector<double> power(static_cast<std::size_t>(kappa) + 1);
    for (int r = 0; r <= kappa; ++r) power[static_cast<std::size_t>(r)] = std::pow(eps, r) * std::pow(1.0 - eps, kappa - r);
    std::vector<double> W(V * u);
    std::vector<std::uint32_t> dist(u);
    for (std::uint64_t v = 0; v < V; ++v) {
        kernels::hamming_many(&v, patterns.data(), u, 1, dist.data());
        for (std::size_t j = 0; j < u; ++j) W[v * u + j] = power[dist[j]];
    }

    MlSearch s;
    s.M = M;
    s.V = V;
    s.u = u;
    s.W = &W;
    s.counts = &counts;
    s.partial.assign(static_cast<std::size_t>(M) + 1, std::vector<double>(u, 0.0));
    s.pick.assign(static_cast<std::size_t>(M), 0);
    s.descend(0, 0);
    return hypothesis_from_codes(s.best, kappa);
}

double nu_min_for(NuMinMode mode, int kappa, double eta)
{
    return mode == NuMinMode::worst_case ? 1.0 : kappa * (1.0 - eta);
}

double default_tau(double eps, double nu_min, int kappa)
{
    double a = 1.0 - 2.0 * eps;
    return a * a * (1.0 - nu_min / kappa);
}

CorrelationGraph build_correlation_graph(const DenoiseBlock& block, double tau_c)
{
    require(block.n >= 1, "correlation graph needs at least one observation");
    require(block.kappa >= 1, "correlation graph needs at least one SNP");
    const int n = block.n, kappa = block.kappa;
    const std::size_t words = (static_cast<std::size_t>(kappa) + 63) / 64;
    std::vector<std::uint64_t> bits(static_cast<std::size_t>(n) * words, 0);
    for (int i = 0; i < n; ++i) {
        const std::int8_t* r = block.row(i);
        std::uint64_t* b = bits.data() + static_cast<std::size_t>(i) * words;
        for (int k = 0; k < kappa; ++k)
            if (r[k] > 0) b[k / 64] |= std::uint64_t{1} << (k % 64);
    }
    CorrelationGraph g;
    g.n = n;
    g.tau_c = tau_c;
    g.C.resize(static_cast<std::size_t>(n) * n);
    g.A.resize(static_cast<std::size_t>(n) * n);
    std::vector<std::uint32_t> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        kernels::hamming_many(bits.data() + static_cast<std::size_t>(i) * words, bits.data(), static_cast<std::size_t>(n),
                              words, dist.data());
        for (int j = 0; j < n; ++j) {
            double c = 1.0 - 2.0 * dist[static_cast<std::size_t>(j)] / static_cast<double>(kappa);
            g.C[static_cast<std::size_t>(i) * n + j] = c;
            g.A[static_cast<std::size_t>(i) * n + j] = c >= tau_c ? 1 : 0;
        }
    }
    return g;
}

std::vector<std::int8_t> majority_vote(const DenoiseBlock& block, const std::vector<std::uint32_t>& rows)
{
    require(!rows.empty(), "majority vote over an empty set of rows");
    std::vector<std::int32_t> sums(static_cast<std::size_t>(block.kappa));
    kernels::column_sums_i8(block.observations.data(), static_cast<std::size_t>(block.kappa), rows.data(), rows.size(),
                            static_cast<std::size_t>(block.kappa), sums.data());
    std::vector<std::int8_t> out(sums.size());
    for (std::size_t k = 0; k < sums.size(); ++k) out[k] = sums[k] > 0 ? 1 : -1;
    return out;
}

namespace {

// Lloyd iterations from farthest-point seeds; returns false if a cluster empties.
bool cluster(const Eigen::MatrixXd& X, int M, int first, int max_iter, std::vector<int>& labels)
{
    const auto n = static_cast<int>(X.rows());
    std::vector<int> centers{first};
    Eigen::VectorXd nearest = (X.rowwise() - X.row(first)).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < M) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (nearest(i) > nearest(far)) far = i;
        centers.push_back(far);
        nearest = nearest.cwiseMin((X.rowwise() - X.row(far)).rowwise().squaredNorm());
    }
    Eigen::MatrixXd C(M, X.cols());
    for (int m = 0; m < M; ++m) C.row(m) = X.row(centers[static_cast<std::size_t>(m)]);

    labels.assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (X.row(i) - C.row(0)).squaredNorm();
            for (int m = 1; m < M; ++m) {
                double d = (X.row(i) - C.row(m)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = m;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(M, X.cols());
        std::vector<int> size(static_cast<std::size_t>(M), 0);
        for (int i = 0; i < n; ++i) {
            sum.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
            ++size[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int m = 0; m < M; ++m) {
            if (size[static_cast<std::size_t>(m)] == 0) return false;
            C.row(m) = sum.row(m) / size[static_cast<std::size_t>(m)];
        }
        if (!changed) break;
    }
    return true;
}

}  // namespace

SpectralResult spectral_denoise(const DenoiseBlock& block, const SpectralOptions& opt, RandomStream& stream)
{
    const int M = block.M, n = block.n;
    require(M >= 1, "spectral denoising needs M >= 1");
    require(n >= M, "spectral denoising needs at least M observations");
    SpectralResult res;
    res.tau_c = opt.tau_c >= 0.0 ? opt.tau_c : default_tau(block.eps, nu_min_for(opt.mode, block.kappa, opt.eta), block.kappa);
    CorrelationGraph g = build_correlation_graph(block, res.tau_c);

    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = g.edge(i, j) ? 1.0 : 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::MatrixXd X(n, M);
    for (int k = 0; k < M; ++k) X.col(k) = es.eigenvectors().col(n - 1 - k) * es.eigenvalues()(n - 1 - k);

    Eigen::RowVectorXd mean = X.colwise().mean();
    int first = 0;
    for (int i = 1; i < n; ++i)
        if ((X.row(i) - mean).squaredNorm() > (X.row(first) - mean).squaredNorm()) first = i;

    bool ok = cluster(X, M, first, opt.max_iterations, res.labels);
    while (!ok && res.retries < opt.max_retries) {
        ++res.retries;
        ok = cluster(X, M, static_cast<int>(stream.below(static_cast<std::uint64_t>(n))), opt.max_iterations, res.labels);
    }
    res.degraded = !ok;

    for (int m = 0; m < M; ++m) {
        std::vector<std::uint32_t> rows;
        for (int i = 0; i < n; ++i)
            if (res.labels[static_cast<std::size_t>(i)] == m) rows.push_back(static_cast<std::uint32_t>(i));
        if (rows.empty())
            res.hypothesis.sequences.emplace_back(static_cast<std::size_t>(block.kappa), std::int8_t{-1});
        else
            res.hypothesis.sequences.push_back(majority_vote(block, rows));
    }
    return res;
}

}  // namespace poolseq
