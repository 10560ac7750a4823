#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "odis/engine.hpp"
#include "odis/network.hpp"
#include "odis/scenarios.hpp"

namespace odis {

using nlohmann::json;

/// Parsed experiment configuration. The JSON layout has three named blocks
/// plus run-level fields:
///
///   {
///     "scenario": { "kind": "synthetic" | "dispatch" | "pev", ... },
///     "graph":    { "preset": "switching3", "B": 3 }
///                 or { "adjacency": [[[...]]], "B": ... },
///     "schedule": { "kappa1": 0.25, "kappa2": 0.25 },
///     "horizon": 200, "seed": 42, "output_dir": "out",
///     "flags": { "compute_oracle": true, "check_invariants": true,
///                "run_centralized_baseline": false },
///     "init_policy": "zero" | "uniform",
///     "sweep": [ { "name": "...", <overrides> }, ... ]
///   }
///
/// Dispatch scenarios name their market source:
///   "market": { "type": "csv", "path": "...", "region": "NSW",
///               "interval_minutes": 5 }
///   or { "type": "synthetic", "steps": 2880 }.
struct ExperimentConfig {
    enum class ScenarioKind { Synthetic, Dispatch, Pev };
    ScenarioKind kind = ScenarioKind::Synthetic;

    SyntheticSpec synthetic;
    PevSpec pev;
    DispatchSpec dispatch;

    enum class MarketSourceType { Csv, Synthetic };
    MarketSourceType market_type = MarketSourceType::Synthetic;
    std::string market_path;
    std::string market_region = "SYN";
    int market_interval_minutes = 5;
    int market_steps = 0;  // synthetic source; 0 means horizon

    std::string graph_preset = "switching3";
    std::vector<MatrixXi> adjacency;  // explicit sequence when preset is empty
    int window_b = 3;

    double kappa1 = 0.25;
    double kappa2 = 0.25;

    int horizon = 200;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool compute_oracle = true;
    bool check_invariants = true;
    bool run_centralized_baseline = false;
    InitPolicy init_policy = InitPolicy::ZeroProjection;

    std::vector<json> sweep;  // override objects, applied as JSON merge patches

    json raw;  // canonical parsed document (for hashing / sweeps)
};

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Static validation: schedule admissibility, graph construction +
/// B-connectivity, scenario shape checks, market file existence. Returns a
/// human-readable summary; throws on the first failure.
std::string validate_config(const ExperimentConfig& config);

/// Builds the graph named by the config.
GraphSequence build_graph(const ExperimentConfig& config);

/// Builds the scenario (ingesting or synthesizing market data as needed).
Scenario build_scenario(const ExperimentConfig& config);

/// FNV-1a over the canonical (sorted-key) dump of the parsed document.
std::uint64_t config_hash(const json& doc);

}  // namespace odis
