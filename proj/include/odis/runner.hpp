#pragma once

#include <string>
#include <vector>

#include "odis/config.hpp"
#include "odis/diagnostics.hpp"
#include "odis/metrics.hpp"

namespace odis {

inline constexpr const char* kVersion = "0.1.0";

/// Everything one experiment run produced. `files` lists the artifacts
/// written under `dir` (all referenced by manifest.json).
struct ResultsBundle {
    std::string dir;
    std::vector<std::string> files;
    bool run_completed = false;
    int failure_step = -1;
    bool invariants_ok = true;   // true when checks were skipped
    InvariantReport invariants;
    MetricsReport metrics;
    double wall_clock_seconds = 0.0;
};

/// Executes run -> oracle -> metrics -> invariant checks and writes the
/// bundle (violation.csv, regret.csv unless the oracle is skipped,
/// invariants.json, trace_summary.json, manifest.json) under out_dir.
/// Throws for invalid inputs; numerical blow-up is reported through
/// run_completed with partial outputs written.
ResultsBundle cmd_run(const ExperimentConfig& config, const std::string& out_dir);

/// Static validation; returns the report string, throws on invalid configs.
std::string cmd_validate(const ExperimentConfig& config);

/// Runs one bundle per sweep point (base config + JSON merge patch) under
/// out_dir/<point name>. Every point is validated before any run starts.
std::vector<ResultsBundle> cmd_sweep(const ExperimentConfig& config,
                                     const std::string& out_dir);

/// Full command-line entry point (exit codes: 0 success, 1 invariant gate
/// failed, 2 invalid config, 3 numerical blow-up).
int cli_main(int argc, char** argv);

}  // namespace odis
