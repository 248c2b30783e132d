#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace specmap::cli {

struct RunConfig {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    int trials = 100;
    int grid = 256;
    bool dump_eigenvalues = false;
    std::optional<double> a;
    std::optional<double> b;
    std::vector<int> n_grid = {100, 200, 400};
};

void cmd_support(const RunConfig& config);
void cmd_spiked(const RunConfig& config);
void cmd_separation(const RunConfig& config);
void cmd_convergence(const RunConfig& config);
void cmd_perturb_check(const RunConfig& config);

/// Exit codes: 0 success, 2 input error, 3 numerical failure, 4 vacuous request.
int run_cli(int argc, const char* const* argv);

}  // namespace specmap::cli
