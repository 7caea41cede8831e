#include "cli_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "poolseq/error.hpp"
#include "poolseq/stats.hpp"

namespace poolseq::cli {

namespace {

const std::vector<std::string> kKeys = {
    "G",        "M",      "p",       "L",         "lambda", "eta",    "maf",    "eps",   "D",    "d",       "c_const",
    "nu_min_mode", "trials", "seed", "window",    "variant", "mode",  "vote_span", "target", "bound", "L_min", "L_max",
    "depth",    "kappa",  "n",       "coverage",  "method", "ml_cap", "tau",    "kernel", "mem_cap_mb", "empty_block"};

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double number(const KeyValues& kv, const std::string& key)
{
    const std::string& v = kv.at(key);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not a number");
    }
    if (used != v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
    return x;
}

long integer(const KeyValues& kv, const std::string& key)
{
    double x = number(kv, key);
    if (x != std::floor(x) || std::fabs(x) > 9e15) throw ConfigError(key + ": '" + kv.at(key) + "' is not an integer");
    return static_cast<long>(x);
}

template <typename T>
void maybe(const KeyValues& kv, const std::string& key, T& out)
{
    if (!kv.count(key)) return;
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long>)
        out = static_cast<T>(integer(kv, key));
    else if constexpr (std::is_same_v<T, std::uint64_t>) {
        long v = integer(kv, key);
        if (v < 0) throw ConfigError(key + ": must be non-negative");
        out = static_cast<std::uint64_t>(v);
    } else
        out = number(kv, key);
}

std::string choice(const KeyValues& kv, const std::string& key, const std::string& def,
                   const std::vector<std::string>& allowed)
{
    if (!kv.count(key)) return def;
    const std::string& v = kv.at(key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
        throw ConfigError(key + ": '" + v + "' is not one of " + list);
    }
    return v;
}

std::string nu_name(NuMinMode m) { return m == NuMinMode::worst_case ? "worst_case" : "average_case"; }
std::string method_name(DenoiseMethod m)
{
    return m == DenoiseMethod::ml ? "ml" : m == DenoiseMethod::spectral ? "spectral" : "auto";
}
std::string mode_name(BoundMode m) { return m == BoundMode::exact ? "exact" : "asymptotic"; }

std::vector<std::string> echo_columns(const Params& p)
{
    std::vector<std::string> c;
    for (auto& [k, v] : echo(p)) c.push_back(k);
    return c;
}

std::vector<std::string> echo_values(const Params& p)
{
    std::vector<std::string> c;
    for (auto& [k, v] : echo(p)) c.push_back(v);
    return c;
}

std::vector<Params> to_params_all(const std::vector<KeyValues>& grid)
{
    std::vector<Params> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            out.push_back(to_params(grid[i]));
        } catch (const ValidationError& e) {
            throw ConfigError("grid point " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Chunks of consecutive trial indices; results are sums, so chunking never changes them.
std::vector<std::pair<long, long>> chunks(long trials, int workers)
{
    std::vector<std::pair<long, long>> c;
    const long per = std::max(1L, trials / std::max(1, workers * 4));
    for (long t = 0; t < trials; t += per) c.emplace_back(t, std::min(per, trials - t));
    return c;
}

double minor_frequency(const Params& p)
{
    return p.maf ? *p.maf : minor_frequency_for_eta(p.eta);
}

}  // namespace

bool known_key(const std::string& key) { return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end(); }

KeyValues parse_config_text(const std::string& text, const std::string& source)
{
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(no) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value, got '" + line + "'");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (!known_key(k)) throw ConfigError(where + "unknown key '" + k + "'");
        if (v.empty()) throw ConfigError(where + "empty value for '" + k + "'");
        if (kv.count(k)) throw ConfigError(where + "duplicate key '" + k + "'");
        kv[k] = v;
    }
    return kv;
}

KeyValues load_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

void apply_override(KeyValues& kv, const std::string& a)
{
    auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + a + "': expected key=value");
    std::string k = trim(a.substr(0, eq)), v = trim(a.substr(eq + 1));
    if (!known_key(k)) throw ConfigError("override '" + a + "': unknown key '" + k + "'");
    if (v.empty()) throw ConfigError("override '" + a + "': empty value");
    kv[k] = v;
}

std::vector<double> Axis::values() const
{
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        v.push_back(log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min));
    }
    if (count > 1) v.back() = max;
    return v;
}

Axis parse_axis(const std::string& text)
{
    auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep '" + text + "': expected key=min:max:count[:log]");
    Axis a;
    a.key = trim(text.substr(0, eq));
    if (!known_key(a.key)) throw ConfigError("sweep '" + text + "': unknown key '" + a.key + "'");
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(eq + 1));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.size() < 3 || parts.size() > 4) throw ConfigError("sweep '" + text + "': expected min:max:count[:log]");
    KeyValues tmp{{"min", parts[0]}, {"max", parts[1]}, {"count", parts[2]}};
    a.min = number(tmp, "min");
    a.max = number(tmp, "max");
    long c = integer(tmp, "count");
    if (c < 1) throw ConfigError("sweep '" + text + "': count must be >= 1");
    a.count = static_cast<int>(c);
    if (parts.size() == 4) {
        if (parts[3] == "log")
            a.log = true;
        else if (parts[3] != "lin")
            throw ConfigError("sweep '" + text + "': scale must be log or lin");
    }
    if (a.log && !(a.min > 0.0 && a.max > 0.0)) throw ConfigError("sweep '" + text + "': log axis needs positive ends");
    return a;
}

std::vector<KeyValues> expand_grid(const KeyValues& base, const std::vector<Axis>& axes)
{
    std::vector<KeyValues> grid{base};
    for (const auto& ax : axes) {
        std::vector<KeyValues> next;
        for (const auto& g : grid)
            for (double v : ax.values()) {
                KeyValues kv = g;
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                kv[ax.key] = buf;
                next.push_back(std::move(kv));
            }
        grid = std::move(next);
    }
    return grid;
}

Params to_params(const KeyValues& kv)
{
    Params p;
    auto& m = p.model;
    m.genome_length_G = 1e6;
    maybe(kv, "G", m.genome_length_G);
    maybe(kv, "M", m.num_individuals_M);
    maybe(kv, "p", m.snp_rate_p);
    maybe(kv, "L", m.read_length_L);
    maybe(kv, "lambda", m.read_density_lambda);
    maybe(kv, "eps", m.noise_eps);
    if (kv.count("depth")) {
        p.depth = number(kv, "depth");
        if (!(*p.depth > 0.0)) throw ConfigError("depth: must be positive");
        if (kv.count("lambda")) throw ConfigError("depth and lambda are mutually exclusive");
        m.read_density_lambda = *p.depth / m.read_length_L;
    }
    if (kv.count("maf") && kv.count("eta")) throw ConfigError("eta and maf are mutually exclusive");
    if (kv.count("maf")) {
        p.maf = number(kv, "maf");
        m.allele_law = FixedBiallelic{*p.maf};
    } else {
        maybe(kv, "eta", p.eta);
        m.allele_law = FixedEta{p.eta};
    }
    m.read_window = choice(kv, "window", "overlapping", {"overlapping", "starts_in_genome"}) == "overlapping"
                        ? ReadWindow::overlapping
                        : ReadWindow::starts_in_genome;
    m.validate();
    p.eta = m.eta();

    if (kv.count("D") != kv.count("d")) throw ConfigError("D and d must be given together");
    if (kv.count("D")) {
        SegmentationPlan plan{number(kv, "D"), number(kv, "d")};
        try {
            validate_plan(plan, m.read_length_L);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("plan: ") + e.what());
        }
        p.plan = plan;
    }
    maybe(kv, "c_const", p.c_const);
    p.nu_mode = choice(kv, "nu_min_mode", "worst_case", {"worst_case", "average_case"}) == "worst_case"
                    ? NuMinMode::worst_case
                    : NuMinMode::average_case;
    maybe(kv, "trials", p.trials);
    if (p.trials < 0) throw ConfigError("trials: must be >= 0");
    maybe(kv, "seed", p.seed);
    const std::string v = choice(kv, "variant", "exact", {"exact", "asymptotic", "headline"});
    p.variant = v == "exact" ? Variant::exact : v == "asymptotic" ? Variant::asymptotic : Variant::headline;
    p.noisy_mode = choice(kv, "mode", "asymptotic", {"exact", "asymptotic"}) == "exact" ? BoundMode::exact
                                                                                         : BoundMode::asymptotic;
    p.vote_span = choice(kv, "vote_span", "segment", {"segment", "covering"}) == "covering";
    p.empty_block_failure = choice(kv, "empty_block", "failure", {"failure", "ignore"}) == "failure";
    maybe(kv, "target", p.target);
    if (!(p.target > 0.0 && p.target <= 1.0)) throw ConfigError("target: must lie in (0, 1]");
    p.bound = choice(kv, "bound", "upper", {"upper", "lower", "ml", "spectral"});
    maybe(kv, "L_min", p.L_min);
    maybe(kv, "L_max", p.L_max);
    if (!(p.L_min >= 0.0 && p.L_max > p.L_min)) throw ConfigError("L_min/L_max: need 0 <= L_min < L_max");
    maybe(kv, "kappa", p.kappa);
    if (p.kappa < 1 || p.kappa > 4096) throw ConfigError("kappa: must lie in [1, 4096]");
    maybe(kv, "n", p.n);
    maybe(kv, "coverage", p.coverage);
    const std::string meth = choice(kv, "method", "auto", {"auto", "ml", "spectral"});
    p.method = meth == "ml" ? DenoiseMethod::ml : meth == "spectral" ? DenoiseMethod::spectral : DenoiseMethod::automatic;
    maybe(kv, "ml_cap", p.ml_cap);
    maybe(kv, "tau", p.tau_c);
    p.kernel = choice(kv, "kernel", "exact", {"exact", "fresh_stretch"}) == "exact" ? ChainKernel::exact
                                                                                : ChainKernel::fresh_stretch;
    maybe(kv, "mem_cap_mb", p.mem_cap_mb);
    return p;
}

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::pair<std::string, std::string>> echo(const Params& p)
{
    const auto& m = p.model;
    return {{"G", fmt(m.genome_length_G)},
            {"M", std::to_string(m.num_individuals_M)},
            {"p", fmt(m.snp_rate_p)},
            {"eta", fmt(p.eta)},
            {"maf", p.maf ? fmt(*p.maf) : ""},
            {"L", fmt(m.read_length_L)},
            {"lambda", fmt(m.read_density_lambda)},
            {"eps", fmt(m.noise_eps)},
            {"window", read_window_name(m.read_window)},
            {"D", p.plan ? fmt(p.plan->D) : ""},
            {"d", p.plan ? fmt(p.plan->d) : ""},
            {"c_const", fmt(p.c_const)},
            {"nu_min_mode", nu_name(p.nu_mode)},
            {"variant", variant_name(p.variant)},
            {"mode", mode_name(p.noisy_mode)},
            {"vote_span", p.vote_span ? "covering" : "segment"},
            {"empty_block", p.empty_block_failure ? "failure" : "ignore"},
            {"seed", std::to_string(p.seed)},
            {"trials", std::to_string(p.trials)}};
}

void Table::write_csv(std::ostream& os) const
{
    os << kSchemaLine << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

int resolve_workers(int requested)
{
    if (requested > 0) return requested;
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task)
{
    workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double selected_bound(const Params& p, double L)
{
    if (!(L > 0.0)) return 1.0;
    ModelConfig c = p.model;
    c.read_length_L = L;
    if (p.depth) c.read_density_lambda = *p.depth / L;
    std::optional<SegmentationPlan> plan = p.plan;
    if (plan && plan->D > L) return 1.0;
    if (p.bound == "upper") return assembly_bounds(c, p.variant).upper;
    if (p.bound == "lower") return assembly_bounds(c, p.variant).lower;
    if (p.bound == "ml") return noisy_upper_ml(c, plan, p.noisy_mode).bound;
    SpectralBoundOptions so;
    so.nu_mode = p.nu_mode;
    so.c_const = p.c_const;
    so.mode = p.noisy_mode;
    so.vote_over_covering_span = p.vote_span;
    so.empty_block_failure = p.empty_block_failure;
    return noisy_upper_spectral(c, plan, so).bound;
}

CriticalL critical_l(const std::function<double(double)>& bound, double target, double L_min, double L_max)
{
    CriticalL r;
    r.lo = L_min;
    r.hi = L_max;
    if (bound(L_min) <= target) {
        r.L = L_min;
        r.hi = L_min;
        r.at_edge = true;
        return r;
    }
    if (bound(L_max) > target) {
        r.region_empty = true;
        r.L = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    double lo = L_min, hi = L_max;
    while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (bound(mid) <= target ? hi : lo) = mid;
        ++r.iterations;
    }
    r.lo = lo;
    r.hi = hi;
    r.L = hi;
    return r;
}

CommandOutput cmd_bounds(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    out.table.columns = concat({"grid"}, echo_columns(params.empty() ? Params{} : params.front()));
    out.table.columns = concat(out.table.columns,
                               {"esc_lower", "esc_upper", "eb_lower", "eb_upper", "e_lower", "e_upper", "degenerate",
                                "en_ml_upper", "ml_D", "ml_d", "en_spectral_upper", "spectral_D", "spectral_d"});
    out.table.rows.resize(params.size());
    parallel_for(params.size(), ro.workers, [&](std::size_t i) {
        const Params& p = params[i];
        const auto& c = p.model;
        BoundReport cov = coverage_bounds(c.genome_length_G, c.snp_rate_p, c.read_density_lambda, c.read_length_L,
                                          c.num_individuals_M, p.variant == Variant::exact ? Variant::exact
                                                                                          : Variant::asymptotic);
        BoundReport br;
        br.lower = br.upper = 0.0;
        if (c.num_individuals_M >= 2)
            br = bridging_bounds(c.num_individuals_M, c.genome_length_G, c.snp_rate_p, p.eta, c.read_density_lambda,
                                 c.read_length_L, p.variant);
        BoundReport all = assembly_bounds(c, p.variant);
        std::vector<std::string> row = concat({std::to_string(i)}, echo_values(p));
        row = concat(row, {fmt(cov.lower), fmt(cov.upper), fmt(br.lower), fmt(br.upper), fmt(all.lower),
                           fmt(all.upper), br.degenerate || all.degenerate ? "1" : "0"});
        if (c.noise_eps > 0.0 && c.num_individuals_M >= 2) {
            NoisyBoundResult ml = noisy_upper_ml(c, p.plan, p.noisy_mode);
            SpectralBoundOptions so{p.nu_mode, p.c_const, p.noisy_mode, p.vote_span, p.empty_block_failure};
            NoisyBoundResult sd = noisy_upper_spectral(c, p.plan, so);
            row = concat(row, {fmt(ml.bound), fmt(ml.plan.D), fmt(ml.plan.d), fmt(sd.bound), fmt(sd.plan.D),
                               fmt(sd.plan.d)});
        } else {
            row = concat(row, {"", "", "", "", "", ""});
        }
        out.table.rows[i] = std::move(row);
    });
    out.summary = ro.json ? nlohmann::json{{"command", "bounds"}, {"points", params.size()}}.dump()
                          : "points=" + std::to_string(params.size());
    return out;
}

CommandOutput cmd_simulate(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    for (const auto& p : params) {
        const double need = estimated_trial_bytes(p.model) * ro.workers / (1024.0 * 1024.0);
        if (need > p.mem_cap_mb) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "estimated %.0f MiB for %d worker(s) exceeds mem_cap_mb=%.0f; lower G, lambda or workers, or "
                          "raise mem_cap_mb",
                          need, ro.workers, p.mem_cap_mb);
            throw CapacityError(buf);
        }
    }
    out.table.columns = concat({"grid", "trial"}, echo_columns(params.empty() ? Params{} : params.front()));
    out.table.columns = concat(out.table.columns, {"num_snps", "num_reads", "coverage_fail", "bridging_fail",
                                                   "greedy_fail", "denoise_fail", "failure"});
    std::vector<std::pair<std::size_t, long>> tasks;
    for (std::size_t g = 0; g < params.size(); ++g)
        for (long t = 0; t < params[g].trials; ++t) tasks.emplace_back(g, t);
    std::vector<TrialOutcome> results(tasks.size());
    parallel_for(tasks.size(), ro.workers, [&](std::size_t i) {
        const Params& p = params[tasks[i].first];
        TrialOptions to;
        to.plan = p.plan;
        to.method = p.method;
        to.ml_hypothesis_cap = p.ml_cap;
        to.nu_mode = p.nu_mode;
        results[i] = run_trial(p.model, p.seed, static_cast<std::uint64_t>(tasks[i].second), to);
    });

    nlohmann::json js = nlohmann::json::array();
    std::ostringstream text;
    std::size_t k = 0;
    for (std::size_t g = 0; g < params.size(); ++g) {
        const Params& p = params[g];
        long cnt[5] = {0, 0, 0, 0, 0};
        for (long t = 0; t < p.trials; ++t, ++k) {
            const TrialOutcome& o = results[k];
            const bool flags[5] = {o.coverage_fail, o.bridging_fail, o.greedy_fail, o.denoise_fail, o.failure};
            std::vector<std::string> row = concat({std::to_string(g), std::to_string(t)}, echo_values(p));
            row = concat(row, {std::to_string(o.num_snps), std::to_string(o.num_reads)});
            for (int f = 0; f < 5; ++f) {
                cnt[f] += flags[f];
                row.push_back(flags[f] ? "1" : "0");
            }
            out.table.rows.push_back(std::move(row));
        }
        static const char* names[5] = {"coverage_fail", "bridging_fail", "greedy_fail", "denoise_fail", "failure"};
        nlohmann::json point{{"grid", g}, {"trials", p.trials}};
        text << "grid=" << g << " trials=" << p.trials;
        for (int f = 0; f < 5; ++f) {
            const double n = static_cast<double>(p.trials);
            const double rate = p.trials ? cnt[f] / n : 0.0;
            Interval ci = wilson_interval(static_cast<double>(cnt[f]), n);
            point[names[f]] = {{"count", cnt[f]}, {"rate", rate}, {"ci_low", ci.low}, {"ci_high", ci.high}};
            text << ' ' << names[f] << '=' << fmt(rate) << " [" << fmt(ci.low) << ',' << fmt(ci.high) << ']';
        }
        text << '\n';
        js.push_back(point);
    }
    out.summary = ro.json ? nlohmann::json{{"command", "simulate"}, {"points", js}}.dump() : text.str();
    return out;
}

CommandOutput cmd_critical_l(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    out.table.columns = concat({"grid"}, echo_columns(params.empty() ? Params{} : params.front()));
    out.table.columns = concat(out.table.columns, {"depth", "target", "bound", "L_min", "L_max", "critical_L",
                                                   "bracket_lo", "bracket_hi", "iterations", "monotone", "status"});
    out.table.rows.resize(params.size());
    std::vector<CriticalL> res(params.size());
    parallel_for(params.size(), ro.workers, [&](std::size_t i) {
        const Params& p = params[i];
        auto f = [&](double L) { return selected_bound(p, L); };
        res[i] = critical_l(f, p.target, p.L_min, p.L_max);
        bool monotone = true;
        double prev = 2.0;
        for (int k = 0; k <= 8; ++k) {
            double v = f(p.L_min + (p.L_max - p.L_min) * k / 8.0);
            if (v > prev * (1.0 + 1e-6) + 1e-300) monotone = false;
            prev = v;
        }
        const CriticalL& r = res[i];
        std::vector<std::string> row = concat({std::to_string(i)}, echo_values(p));
        row = concat(row, {p.depth ? fmt(*p.depth) : "", fmt(p.target), p.bound, fmt(p.L_min), fmt(p.L_max),
                           fmt(r.L), fmt(r.lo), fmt(r.hi), std::to_string(r.iterations), monotone ? "1" : "0",
                           r.region_empty ? "region_empty" : r.at_edge ? "edge" : "ok"});
        out.table.rows[i] = std::move(row);
    });
    nlohmann::json js = nlohmann::json::array();
    std::ostringstream text;
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (res[i].region_empty) out.exit_code = kRegionEmpty;
        js.push_back({{"grid", i},
                      {"critical_L", res[i].region_empty ? nlohmann::json(nullptr) : nlohmann::json(res[i].L)},
                      {"region_empty", res[i].region_empty}});
        text << "grid=" << i << " critical_L=" << (res[i].region_empty ? "region_empty" : fmt(res[i].L)) << '\n';
    }
    out.summary = ro.json ? nlohmann::json{{"command", "critical-l"}, {"points", js}}.dump() : text.str();
    return out;
}

CommandOutput cmd_exponent(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    out.table.columns = {"grid", "M", "kappa", "eps", "i", "D_i_numeric", "D_closed", "D_canonical_pair"};
    std::vector<std::vector<std::vector<std::string>>> blocks(params.size());
    parallel_for(params.size(), ro.workers, [&](std::size_t g) {
        const Params& p = params[g];
        const int M = p.model.num_individuals_M;
        const double eps = p.model.noise_eps;
        ExponentTable t = exponent_table(M, p.kappa, eps, ExponentMethod::numeric);
        const double closed = exponent_closed(M, eps);
        auto [a, b] = canonical_pair(M, std::max(p.kappa, 1));
        const double canon = exponent_numeric(a, b, eps);
        for (int i = 1; i <= M * p.kappa; ++i)
            blocks[g].push_back({std::to_string(g), std::to_string(M), std::to_string(p.kappa), fmt(eps),
                                 std::to_string(i), fmt(t.at(i)), fmt(closed), fmt(canon)});
    });
    for (auto& b : blocks)
        for (auto& r : b) out.table.rows.push_back(std::move(r));
    out.summary = ro.json ? nlohmann::json{{"command", "exponent"}, {"points", params.size()}}.dump()
                          : "points=" + std::to_string(params.size());
    return out;
}

CommandOutput cmd_denoise_bench(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    out.table.columns = concat({"grid"}, echo_columns(params.empty() ? Params{} : params.front()));
    out.table.columns = concat(out.table.columns, {"kappa", "n", "coverage", "method", "tau", "successes",
                                                   "success_rate", "ci_low", "ci_high", "capacity_refusals",
                                                   "indeterminate", "degraded", "spectral_threshold"});
    nlohmann::json js = nlohmann::json::array();
    std::ostringstream text;
    for (std::size_t g = 0; g < params.size(); ++g) {
        const Params& p = params[g];
        const int M = p.model.num_individuals_M;
        const double f = minor_frequency(p);
        SpectralOptions so;
        so.mode = p.nu_mode;
        so.eta = p.eta;
        so.tau_c = p.tau_c;
        DenoiseMethod method = p.method;
        if (method == DenoiseMethod::automatic) {
            const double lh = std::lgamma(std::ldexp(1.0, p.kappa) + 1) - std::lgamma(M + 1.0) -
                              std::lgamma(std::ldexp(1.0, p.kappa) - M + 1);
            method = p.kappa <= 40 && lh <= std::log(p.ml_cap) ? DenoiseMethod::ml : DenoiseMethod::spectral;
        }
        auto parts = chunks(p.trials, ro.workers);
        std::vector<BenchResult> res(parts.size());
        parallel_for(parts.size(), ro.workers, [&](std::size_t i) {
            res[i] = denoise_bench(M, p.kappa, f, p.model.noise_eps, p.n, p.coverage, method, so, parts[i].second,
                                   p.seed, parts[i].first);
        });
        BenchResult tot;
        for (const auto& r : res) {
            tot.trials += r.trials;
            tot.successes += r.successes;
            tot.capacity_refusals += r.capacity_refusals;
            tot.indeterminate += r.indeterminate;
            tot.degraded += r.degraded;
        }
        if (tot.capacity_refusals > 0 && tot.capacity_refusals == tot.trials)
            throw CapacityError("ML enumeration refused for every block; use method=spectral or a smaller kappa");
        const double n = static_cast<double>(tot.trials);
        Interval ci = wilson_interval(static_cast<double>(tot.successes), n);
        const double rate = tot.trials ? tot.successes / n : 0.0;
        const double thr = spectral_eps_threshold(p.kappa, nu_min_for(p.nu_mode, p.kappa, p.eta));
        std::vector<std::string> row = concat({std::to_string(g)}, echo_values(p));
        row = concat(row, {std::to_string(p.kappa), std::to_string(p.n), p.n >= 0 ? "" : fmt(p.coverage),
                           method_name(method), fmt(p.tau_c), std::to_string(tot.successes), fmt(rate), fmt(ci.low),
                           fmt(ci.high), std::to_string(tot.capacity_refusals), std::to_string(tot.indeterminate),
                           std::to_string(tot.degraded), fmt(thr)});
        out.table.rows.push_back(std::move(row));
        js.push_back({{"grid", g}, {"success_rate", rate}, {"ci_low", ci.low}, {"ci_high", ci.high}});
        text << "grid=" << g << " success_rate=" << fmt(rate) << " [" << fmt(ci.low) << ',' << fmt(ci.high) << "]\n";
    }
    out.summary = ro.json ? nlohmann::json{{"command", "denoise-bench"}, {"points", js}}.dump() : text.str();
    return out;
}

CommandOutput cmd_exact_bridging(const std::vector<KeyValues>& grid, const RunOptions& ro)
{
    auto params = to_params_all(grid);
    CommandOutput out;
    out.table.columns = concat({"grid"}, echo_columns(params.empty() ? Params{} : params.front()));
    out.table.columns = concat(out.table.columns, {"kernel", "estimate", "ci_low", "ci_high", "failures", "prefactor",
                                                   "max_steps", "capped", "lower_bound", "upper_bound"});
    nlohmann::json js = nlohmann::json::array();
    std::ostringstream text;
    for (std::size_t g = 0; g < params.size(); ++g) {
        const Params& p = params[g];
        const auto& c = p.model;
        if (c.num_individuals_M != 2) throw ConfigError("exact-bridging: only M=2 is supported");
        if (p.trials < 1) throw ConfigError("exact-bridging: trials must be >= 1");
        auto parts = chunks(p.trials, ro.workers);
        std::vector<BridgingEstimate> res(parts.size());
        parallel_for(parts.size(), ro.workers, [&](std::size_t i) {
            res[i] = estimate_bridging(c.genome_length_G, c.read_length_L, c.read_density_lambda, c.snp_rate_p, p.eta,
                                       parts[i].second, p.seed, p.kernel, parts[i].first);
        });
        BridgingEstimate tot;
        tot.prefactor = res.front().prefactor;
        for (const auto& r : res) {
            tot.trials += r.trials;
            tot.failures += r.failures;
            tot.capped += r.capped;
            tot.max_steps = std::max(tot.max_steps, r.max_steps);
        }
        Interval ci = wilson_interval(static_cast<double>(tot.failures), static_cast<double>(tot.trials));
        tot.estimate = tot.prefactor * tot.failures / static_cast<double>(tot.trials);
        BoundReport br = bridging_bounds(2, c.genome_length_G, c.snp_rate_p, p.eta, c.read_density_lambda,
                                         c.read_length_L, Variant::exact);
        std::vector<std::string> row = concat({std::to_string(g)}, echo_values(p));
        row = concat(row, {p.kernel == ChainKernel::exact ? "exact" : "fresh_stretch", fmt(tot.estimate),
                           fmt(tot.prefactor * ci.low), fmt(tot.prefactor * ci.high), std::to_string(tot.failures),
                           fmt(tot.prefactor), std::to_string(tot.max_steps), std::to_string(tot.capped),
                           fmt(br.lower), fmt(br.upper)});
        out.table.rows.push_back(std::move(row));
        js.push_back({{"grid", g}, {"estimate", tot.estimate}, {"ci_low", tot.prefactor * ci.low},
                      {"ci_high", tot.prefactor * ci.high}});
        text << "grid=" << g << " estimate=" << fmt(tot.estimate) << '\n';
    }
    out.summary = ro.json ? nlohmann::json{{"command", "exact-bridging"}, {"points", js}}.dump() : text.str();
    return out;
}

}  // namespace poolseq::cli
