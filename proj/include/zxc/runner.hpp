// Run configuration, orchestration and persistence.
//
// Config format (one `key = value` per line, `#` starts a comment):
//
//   system = billiard            # billiard | toy1d | toy3d | quotient-billiard
//   seed = 20240601
//   n_grid = 1000, 3000, 10000
//   t_grid = 10000
//   n_starts = 2000
//   reps = 2000
//   initial_law = natural        # natural | mu_bar | lebesgue
//   output_dir = out
//   [table]
//   tau_max = 1.6
//   disk = 0.25, 0.25, 0.40
//   disk = 0.75, 0.75, 0.20
//
// Unknown keys are rejected. Anything after `[table]` belongs to the table.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zxc/billiard.hpp"

namespace zxc {

struct RunConfig {
    std::string system = "billiard";
    std::vector<Disk> disks;
    double tau_max = 0.0;
    bool has_table = false;
    std::vector<std::int64_t> n_grid;
    std::vector<double> t_grid;
    std::int64_t n_starts = 2000;
    std::int64_t reps = 2000;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string initial_law = "natural";
    std::string output_dir = "out";

    // optional tuning knobs; defaults chosen per subcommand when zero
    std::int64_t n_pairs = 0;
    std::int64_t n_tau = 0;
    std::int64_t oracle_m = 0;
    std::int64_t variance_n = 0;
    std::int64_t variance_paths = 0;
    int angle_grid = 10000;

    BilliardTable table() const;
};

/// Parse config text; throws ValidationError with a line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    int workers = 0;  // 0: ZXC_WORKERS or hardware concurrency
    std::optional<std::string> out;
};

/// Worker count: flag, then ZXC_WORKERS, then hardware concurrency.
int workers_from(const RunOptions& opt);

extern const char* const kCodeVersion;
const std::vector<std::string>& subcommands();

/// Execute a subcommand and write manifest.json, report.json, samples.csv
/// under the output directory. Returns the process exit status:
/// 0 all assertions pass, 1 some assertion failed or the run aborted,
/// 2 invalid configuration or table.
int run(const std::string& subcommand, const RunConfig& cfg, const RunOptions& opt);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace zxc
