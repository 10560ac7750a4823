#include "odis/config.hpp"

#include <filesystem>
#include <fstream>

namespace odis {

namespace {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
}

void parse_scenario_block(const json& block, ExperimentConfig& cfg) {
    const auto kind = require<std::string>(block, "kind", "scenario");
    if (kind == "synthetic") {
        cfg.kind = ExperimentConfig::ScenarioKind::Synthetic;
        auto& s = cfg.synthetic;
        s.nodes = get_or(block, "nodes", 5);
        const int d = get_or(block, "dims", 3);
        if (block.contains("dims_per_node"))
            s.dims = block.at("dims_per_node").get<std::vector<int>>();
        else
            s.uniform_dims(d);
        s.radius = get_or(block, "radius", 300.0);
        s.increment = get_or(block, "increment", 0.05);
        s.positivity_floor = get_or(block, "positivity_floor", 0.01);
    } else if (kind == "dispatch") {
        cfg.kind = ExperimentConfig::ScenarioKind::Dispatch;
        auto& d = cfg.dispatch;
        if (block.contains("costs")) {
            d.costs.clear();
            for (const auto& row : block.at("costs")) {
                if (!row.is_array() || row.size() != 3)
                    throw ConfigError("scenario.costs entries must be [a, b, c] triples");
                d.costs.push_back({row[0].get<double>(), row[1].get<double>(),
                                   row[2].get<double>()});
            }
        } else {
            d.costs = default_dispatch_costs();
        }
        if (block.contains("shares"))
            d.shares = block.at("shares").get<std::vector<double>>();
        d.output_min = get_or(block, "output_min", 0.0);
        d.output_max = get_or(block, "output_max", 0.0);

        if (!block.contains("market"))
            throw ConfigError("dispatch scenario requires a 'market' block");
        const auto& market = block.at("market");
        const auto type = require<std::string>(market, "type", "scenario.market");
        if (type == "csv") {
            cfg.market_type = ExperimentConfig::MarketSourceType::Csv;
            cfg.market_path = require<std::string>(market, "path", "scenario.market");
        } else if (type == "synthetic") {
            cfg.market_type = ExperimentConfig::MarketSourceType::Synthetic;
            cfg.market_steps = get_or(market, "steps", 0);
        } else {
            throw ConfigError("scenario.market.type must be 'csv' or 'synthetic'");
        }
        cfg.market_region = get_or<std::string>(market, "region", "SYN");
        cfg.market_interval_minutes = get_or(market, "interval_minutes", 5);
    } else if (kind == "pev") {
        cfg.kind = ExperimentConfig::ScenarioKind::Pev;
        auto& p = cfg.pev;
        p.nodes = get_or(block, "nodes", 5);
        p.dims = get_or(block, "dims", 2);
        p.constraint_dim = get_or(block, "constraint_dim", 3);
        p.radius = get_or(block, "radius", 10.0);
    } else {
        throw ConfigError("scenario.kind must be 'synthetic', 'dispatch', or 'pev'");
    }
}

void parse_graph_block(const json& block, ExperimentConfig& cfg) {
    cfg.window_b = get_or(block, "B", 3);
    if (block.contains("adjacency")) {
        cfg.graph_preset.clear();
        cfg.adjacency.clear();
        for (const auto& mat : block.at("adjacency")) {
            const auto rows = mat.get<std::vector<std::vector<int>>>();
            const int n = static_cast<int>(rows.size());
            MatrixXi adj(n, n);
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
                    throw ConfigError("graph.adjacency matrices must be square");
                for (int j = 0; j < n; ++j)
                    adj(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            cfg.adjacency.push_back(adj);
        }
        if (cfg.adjacency.empty()) throw ConfigError("graph.adjacency is empty");
    } else {
        cfg.graph_preset = get_or<std::string>(block, "preset", "switching3");
    }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = doc;

    if (!doc.contains("scenario")) throw ConfigError("missing 'scenario' block");
    parse_scenario_block(doc.at("scenario"), cfg);

    if (!doc.contains("graph")) throw ConfigError("missing 'graph' block");
    parse_graph_block(doc.at("graph"), cfg);

    if (!doc.contains("schedule")) throw ConfigError("missing 'schedule' block");
    cfg.kappa1 = require<double>(doc.at("schedule"), "kappa1", "schedule");
    cfg.kappa2 = require<double>(doc.at("schedule"), "kappa2", "schedule");

    cfg.horizon = require<int>(doc, "horizon", "config");
    if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);
    cfg.output_dir = get_or<std::string>(doc, "output_dir", "out");

    if (doc.contains("flags")) {
        const auto& flags = doc.at("flags");
        cfg.compute_oracle = get_or(flags, "compute_oracle", true);
        cfg.check_invariants = get_or(flags, "check_invariants", true);
        cfg.run_centralized_baseline = get_or(flags, "run_centralized_baseline", false);
    }

    const auto policy = get_or<std::string>(doc, "init_policy", "zero");
    if (policy == "zero")
        cfg.init_policy = InitPolicy::ZeroProjection;
    else if (policy == "uniform")
        cfg.init_policy = InitPolicy::SeededUniform;
    else
        throw ConfigError("init_policy must be 'zero' or 'uniform'");

    if (doc.contains("sweep")) {
        if (!doc.at("sweep").is_array()) throw ConfigError("'sweep' must be an array");
        for (const auto& point : doc.at("sweep")) cfg.sweep.push_back(point);
    }

    // Propagate run-level fields into the scenario specs.
    cfg.synthetic.horizon = cfg.horizon;
    cfg.synthetic.seed = cfg.seed;
    if (static_cast<int>(cfg.synthetic.dims.size()) != cfg.synthetic.nodes)
        cfg.synthetic.uniform_dims(cfg.synthetic.dims.empty() ? 3
                                                              : cfg.synthetic.dims.front());
    cfg.pev.horizon = cfg.horizon;
    cfg.pev.seed = cfg.seed;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

GraphSequence build_graph(const ExperimentConfig& cfg) {
    int nodes = 0;
    switch (cfg.kind) {
        case ExperimentConfig::ScenarioKind::Synthetic: nodes = cfg.synthetic.nodes; break;
        case ExperimentConfig::ScenarioKind::Dispatch:
            nodes = static_cast<int>(cfg.dispatch.costs.size());
            break;
        case ExperimentConfig::ScenarioKind::Pev: nodes = cfg.pev.nodes; break;
    }
    if (!cfg.graph_preset.empty()) return make_preset(cfg.graph_preset, nodes, cfg.window_b);
    auto seq = make_sequence(cfg.adjacency, cfg.window_b);
    if (seq.node_count != nodes)
        throw GraphError("explicit adjacency node count " + std::to_string(seq.node_count) +
                         " does not match scenario node count " + std::to_string(nodes));
    return seq;
}

Scenario build_scenario(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentConfig::ScenarioKind::Synthetic:
            return build_synthetic(cfg.synthetic);
        case ExperimentConfig::ScenarioKind::Pev:
            return build_pev(cfg.pev);
        case ExperimentConfig::ScenarioKind::Dispatch: {
            MarketSeries series;
            if (cfg.market_type == ExperimentConfig::MarketSourceType::Csv) {
                series = ingest_market_csv(cfg.market_path, cfg.market_region,
                                           cfg.market_interval_minutes);
            } else {
                const int steps = cfg.market_steps > 0 ? cfg.market_steps : cfg.horizon;
                series = synthesize_market_series(steps, cfg.seed,
                                                  cfg.market_interval_minutes);
                series.region = cfg.market_region;
            }
            if (static_cast<int>(series.size()) < cfg.horizon)
                throw ConfigError("market series has " + std::to_string(series.size()) +
                                  " rows but horizon is " + std::to_string(cfg.horizon));
            return build_dispatch(series, cfg.dispatch);
        }
    }
    throw ConfigError("unreachable scenario kind");
}

std::string validate_config(const ExperimentConfig& cfg) {
    validate_schedule(cfg.kappa1, cfg.kappa2);

    const GraphSequence graph = build_graph(cfg);
    const GraphValidation gv = validate_sequence(graph);
    if (!gv.ok) {
        std::string bad;
        for (const auto& w : gv.windows)
            if (!w.strongly_connected) bad += " window@" + std::to_string(w.start_t);
        throw GraphError("graph validation failed: " + gv.message + bad);
    }

    // Scenario shape checks (static only; no runs).
    switch (cfg.kind) {
        case ExperimentConfig::ScenarioKind::Synthetic: {
            if (cfg.synthetic.nodes < 1) throw ConfigError("scenario.nodes must be >= 1");
            for (int d : cfg.synthetic.dims)
                if (d < 1) throw ConfigError("scenario.dims entries must be >= 1");
            break;
        }
        case ExperimentConfig::ScenarioKind::Dispatch: {
            if (cfg.dispatch.costs.empty()) throw ConfigError("dispatch needs generators");
            for (const auto& c : cfg.dispatch.costs)
                if (!(c.a > 0.0)) throw ConfigError("dispatch cost coefficients need a > 0");
            if (!cfg.dispatch.shares.empty()) {
                if (cfg.dispatch.shares.size() != cfg.dispatch.costs.size())
                    throw ConfigError("dispatch shares must match generator count");
                double sum = 0.0;
                for (double s : cfg.dispatch.shares) sum += s;
                if (std::abs(sum - 1.0) > 1e-12)
                    throw ConfigError("dispatch shares must sum to 1");
            }
            if (cfg.market_type == ExperimentConfig::MarketSourceType::Csv &&
                !std::filesystem::exists(cfg.market_path))
                throw ConfigError("market CSV '" + cfg.market_path + "' does not exist");
            break;
        }
        case ExperimentConfig::ScenarioKind::Pev: {
            if (cfg.pev.nodes < 1 || cfg.pev.dims < 1 || cfg.pev.constraint_dim < 1)
                throw ConfigError("pev dimensions must be positive");
            break;
        }
    }
    return "ok: schedule admissible, graph B-connected, scenario shapes consistent";
}

std::uint64_t config_hash(const json& doc) {
    const std::string canonical = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

}  // namespace odis
