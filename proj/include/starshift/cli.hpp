#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "starshift/potentials.hpp"

namespace starshift::cli {

// Task names accepted in the "tasks" array of a run configuration.
const std::vector<std::string>& known_tasks();

struct RunConfig {
    potentials::StarGraph graph{std::vector<potentials::EdgePotential>{
        potentials::EdgePotential::zero(), potentials::EdgePotential::zero()}};
    std::vector<std::string> tasks;
    // Fully defaulted on parse; config "tolerances" entries override per key
    // (task names plus "rank2" for the rank-two cross-check inside
    // oracle_compare).
    std::map<std::string, double> tolerances;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::complex<double> z{-4.0, 0.0}; // evaluation point for the *_check tasks
};

// JSON config; schema errors name the offending field, star graphs with
// fewer than two edges are rejected outright.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

struct RunOptions {
    std::string output_override;  // empty: use the config output_dir
    double tolerance_scale = 1.0; // multiplies every tolerance
    unsigned threads = 0;         // 0: hardware concurrency
    bool verbose = false;
};

// Runs every configured task (isolated: one failure does not stop the rest),
// writes <task>.csv, <task>.json and summary.json into the output directory.
// Returns the process exit code: 0 all checks passed, 2 residual out of
// tolerance, 1 task error.
int run(const RunConfig& cfg, const RunOptions& opt = {});

} // namespace starshift::cli
