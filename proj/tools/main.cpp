#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli_core.hpp"
#include "poolseq/error.hpp"

using namespace poolseq;
using namespace poolseq::cli;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::string> sweeps;
    std::string output;
    std::string summary;
    bool json = false;
    int workers = 1;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config,-c", c.config, "key=value config file");
    sub->add_option("overrides", c.sets, "key=value overrides applied after the config file");
    sub->add_option("--set", c.sets, "key=value override (repeatable)");
    sub->add_option("--sweep", c.sweeps, "axis key=min:max:count[:log] (repeatable)");
    sub->add_option("--output,-o", c.output, "CSV destination (default stdout)");
    sub->add_option("--summary", c.summary, "write the summary here instead of stderr");
    sub->add_flag("--json", c.json, "emit the summary as JSON");
    sub->add_option("--workers,-j", c.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"poolseq: pooled-sequencing assembly limits, simulation and bounds"};
    app.require_subcommand(1);
    Common c;
    using Cmd = CommandOutput (*)(const std::vector<KeyValues>&, const RunOptions&);
    const std::vector<std::tuple<std::string, std::string, Cmd>> cmds = {
        {"bounds", "evaluate lower/upper bounds per grid point", cmd_bounds},
        {"simulate", "Monte Carlo trials of the full pipeline", cmd_simulate},
        {"critical-l", "smallest read length meeting a target error", cmd_critical_l},
        {"exponent", "ML error exponent tables", cmd_exponent},
        {"denoise-bench", "block-level ML/spectral denoising benchmark", cmd_denoise_bench},
        {"exact-bridging", "Markov-chain estimate of the two-individual bridging error", cmd_exact_bridging},
    };
    std::vector<CLI::App*> subs;
    for (auto& [name, help, fn] : cmds) subs.push_back(app.add_subcommand(name, help));
    for (auto* s : subs) add_common(s, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }

    try {
        KeyValues kv;
        if (!c.config.empty()) kv = load_config_file(c.config);
        for (const auto& s : c.sets) apply_override(kv, s);
        std::vector<Axis> axes;
        for (const auto& s : c.sweeps) axes.push_back(parse_axis(s));
        std::vector<KeyValues> grid = expand_grid(kv, axes);
        RunOptions ro{resolve_workers(c.workers), c.json};

        Cmd fn = nullptr;
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) fn = std::get<2>(cmds[i]);
        CommandOutput out = fn(grid, ro);

        if (c.output.empty() || c.output == "-") {
            out.table.write_csv(std::cout);
        } else {
            std::ofstream f(c.output);
            if (!f) throw ConfigError(c.output + ": cannot write");
            out.table.write_csv(f);
        }
        if (!c.summary.empty()) {
            std::ofstream f(c.summary);
            f << out.summary << '\n';
        } else {
            std::cerr << out.summary << (out.summary.empty() || out.summary.back() == '\n' ? "" : "\n");
        }
        return out.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const CapacityError& e) {
        std::cerr << "capacity refusal: " << e.what() << '\n';
        return kCapacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
