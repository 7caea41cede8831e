#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "poolseq/exact_bridging.hpp"
#include "poolseq/model.hpp"
#include "poolseq/noiseless_bounds.hpp"
#include "poolseq/noisy_bounds.hpp"
#include "poolseq/pipeline.hpp"

namespace poolseq::cli {

inline constexpr const char* kSchemaLine = "#poolseq-limits v1";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

bool known_key(const std::string& key);
// Flat key=value text; '#' starts a comment. Errors carry "<source>:<line>:".
KeyValues parse_config_text(const std::string& text, const std::string& source = "config");
KeyValues load_config_file(const std::string& path);
void apply_override(KeyValues& kv, const std::string& assignment);

struct Axis {
    std::string key;
    double min = 0, max = 0;
    int count = 1;
    bool log = false;

    std::vector<double> values() const;
};
// key=min:max:count[:log|:lin]
Axis parse_axis(const std::string& text);

// Cartesian product; the last axis varies fastest.
std::vector<KeyValues> expand_grid(const KeyValues& base, const std::vector<Axis>& axes);

struct Params {
    ModelConfig model;
    double eta = 0.82;
    std::optional<double> maf;
    std::optional<SegmentationPlan> plan;
    double c_const = 1.0;
    NuMinMode nu_mode = NuMinMode::worst_case;
    long trials = 100;
    std::uint64_t seed = 1;
    Variant variant = Variant::exact;
    BoundMode noisy_mode = BoundMode::asymptotic;
    bool vote_span = false;
    bool empty_block_failure = true;
    double target = 1e-3;
    std::string bound = "upper";
    double L_min = 0.0;
    double L_max = 1e7;
    std::optional<double> depth;
    int kappa = 3;
    int n = -1;
    double coverage = 60.0;
    DenoiseMethod method = DenoiseMethod::automatic;
    double ml_cap = 2e4;
    double tau_c = -1.0;
    ChainKernel kernel = ChainKernel::exact;
    double mem_cap_mb = 2048.0;
};

Params to_params(const KeyValues& kv);
// The full effective parameter set, in a fixed order, for row echo.
std::vector<std::pair<std::string, std::string>> echo(const Params& p);

std::string fmt(double v);

struct RunOptions {
    int workers = 1;
    bool json = false;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& os) const;
};

enum ExitCode { kOk = 0, kConfig = 2, kCapacity = 3, kRegionEmpty = 4 };

struct CommandOutput {
    Table table;
    std::string summary;  // text or JSON per RunOptions::json
    int exit_code = kOk;
};

// Runs tasks 0..n-1 on up to `workers` threads; each task writes only its own slot.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);
int resolve_workers(int requested);

CommandOutput cmd_bounds(const std::vector<KeyValues>& grid, const RunOptions& ro);
CommandOutput cmd_simulate(const std::vector<KeyValues>& grid, const RunOptions& ro);
CommandOutput cmd_critical_l(const std::vector<KeyValues>& grid, const RunOptions& ro);
CommandOutput cmd_exponent(const std::vector<KeyValues>& grid, const RunOptions& ro);
CommandOutput cmd_denoise_bench(const std::vector<KeyValues>& grid, const RunOptions& ro);
CommandOutput cmd_exact_bridging(const std::vector<KeyValues>& grid, const RunOptions& ro);

struct CriticalL {
    double L = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
    bool region_empty = false;
    bool at_edge = false;
};
// Smallest L in [L_min, L_max] with bound(L) <= target, to 0.1% relative.
CriticalL critical_l(const std::function<double(double)>& bound, double target, double L_min, double L_max);
// The bound selected by p.bound evaluated at read length L (with lambda = depth/L when depth is set).
double selected_bound(const Params& p, double L);

}  // namespace poolseq::cli
