#include "odis/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "odis/oracle.hpp"

namespace odis {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_series_csv(const std::string& path, const std::string& header,
                      const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << header << '\n';
    for (std::size_t t = 0; t < values.size(); ++t)
        out << (t + 1) << ',' << fmt17(values[t]) << '\n';
}

json invariants_to_json(const InvariantReport& r) {
    json j;
    j["tracking_identity_max_residual"] = r.tracking_identity_max_residual;
    j["tracking_identity_ok"] = r.tracking_identity_ok;
    j["dual_bound_ok"] = r.dual_bound_ok;
    j["dual_bound_max_ratio"] = r.dual_bound_max_ratio;
    j["mixing_bound_ok"] = r.mixing_bound_ok;
    j["mixing_max_excess"] = r.mixing_max_excess;
    j["feasibility_ok"] = r.feasibility_ok;
    j["dual_nonneg_ok"] = r.dual_nonneg_ok;
    j["dual_mean_identity_max_residual"] = r.dual_mean_identity_max_residual;
    j["max_y_norm"] = r.max_y_norm;
    j["max_z_norm"] = r.max_z_norm;
    j["max_abs_objective"] = r.max_abs_objective;
    j["max_g_norm"] = r.max_g_norm;
    j["tracking_state_stable"] = r.tracking_state_stable;
    j["consensus_decay_fitted"] = r.consensus_decay_fitted;
    j["consensus_decay_analysis"] = r.consensus_decay_analysis;
    j["consensus_decay_ok"] = r.consensus_decay_ok;
    j["run_completed"] = r.run_completed;
    j["all_ok"] = r.all_ok();
    return j;
}

}  // namespace

ResultsBundle cmd_run(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    validate_config(cfg);

    const Scenario scenario = build_scenario(cfg);
    const GraphSequence graph = build_graph(cfg);
    const Schedule schedule = validate_schedule(cfg.kappa1, cfg.kappa2);

    ResultsBundle bundle;
    bundle.dir = out_dir;
    fs::create_directories(out_dir);

    RunTrace trace = run(scenario, graph, schedule, cfg.seed, cfg.horizon, cfg.init_policy);
    trace.meta.graph_label = cfg.graph_preset.empty() ? "explicit" : cfg.graph_preset;
    bundle.run_completed = trace.completed;
    bundle.failure_step = trace.failure_step;

    std::vector<StepOptimum> optima;
    const bool oracle_wanted = cfg.compute_oracle && trace.completed;
    if (oracle_wanted)
        optima = solve_horizon(scenario.problems, cfg.horizon);
    bundle.metrics = compute_metrics(trace, oracle_wanted ? &optima : nullptr);

    write_series_csv(out_dir + "/violation.csv", "t,violation", bundle.metrics.violation);
    bundle.files.push_back("violation.csv");
    if (oracle_wanted) {
        write_series_csv(out_dir + "/regret.csv", "t,regret_cum", bundle.metrics.regret_cum);
        bundle.files.push_back("regret.csv");
    }

    if (cfg.check_invariants) {
        bundle.invariants = check_invariants(trace, scenario, graph);
        bundle.invariants_ok = bundle.invariants.all_ok();
        std::ofstream inv(out_dir + "/invariants.json");
        inv << invariants_to_json(bundle.invariants).dump(2) << '\n';
        bundle.files.push_back("invariants.json");
    }

    json summary;
    summary["scenario"] = trace.meta.scenario_id;
    summary["graph"] = trace.meta.graph_label;
    summary["seed"] = trace.meta.seed;
    summary["kappa1"] = trace.meta.kappa1;
    summary["kappa2"] = trace.meta.kappa2;
    summary["horizon"] = trace.meta.horizon;
    summary["init_policy"] = trace.meta.init_policy;
    summary["completed"] = trace.completed;
    summary["failure_step"] = trace.failure_step;
    summary["steps_recorded"] = trace.steps.size();
    if (!bundle.metrics.violation.empty())
        summary["final_violation"] = bundle.metrics.violation.back();
    if (oracle_wanted) {
        summary["final_regret"] = bundle.metrics.regret_cum.back();
        summary["path_length"] = bundle.metrics.path_length;
        summary["optima"] = {{"count", bundle.metrics.optima_count},
                             {"max_residual", bundle.metrics.optima_max_residual},
                             {"max_multiplier", bundle.metrics.optima_max_multiplier},
                             {"max_iterations", bundle.metrics.optima_max_iterations}};
    }
    if (cfg.run_centralized_baseline && trace.completed) {
        const CentralTrace central =
            run_centralized(scenario, schedule, cfg.seed, cfg.horizon, cfg.init_policy);
        json cj;
        cj["completed"] = central.completed;
        if (!central.steps.empty()) {
            double obj = 0.0;
            VectorXd agg = VectorXd::Zero(trace.constraint_dim);
            for (const auto& rec : central.steps) {
                obj += rec.objective_total;
                agg += rec.aggregate_g;
            }
            cj["objective_cum"] = obj;
            cj["violation_final"] = agg.cwiseMax(0.0).norm();
        }
        summary["centralized_baseline"] = cj;
    }
    {
        std::ofstream out(out_dir + "/trace_summary.json");
        out << summary.dump(2) << '\n';
        bundle.files.push_back("trace_summary.json");
    }

    const auto stop = std::chrono::steady_clock::now();
    bundle.wall_clock_seconds = std::chrono::duration<double>(stop - start).count();

    json manifest;
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg.raw)));
    manifest["config_hash"] = hash_buf;
    manifest["version"] = kVersion;
    manifest["wall_clock_seconds"] = bundle.wall_clock_seconds;
    manifest["files"] = bundle.files;
    manifest["run_completed"] = bundle.run_completed;
    {
        std::ofstream out(out_dir + "/manifest.json");
        out << manifest.dump(2) << '\n';
    }
    bundle.files.push_back("manifest.json");
    return bundle;
}

std::string cmd_validate(const ExperimentConfig& cfg) { return validate_config(cfg); }

std::vector<ResultsBundle> cmd_sweep(const ExperimentConfig& cfg,
                                     const std::string& out_dir) {
    // Validate every grid point before running any: an invalid point rejects
    // the whole sweep.
    std::vector<std::pair<std::string, ExperimentConfig>> points;
    for (std::size_t k = 0; k < cfg.sweep.size(); ++k) {
        json merged = cfg.raw;
        merged.erase("sweep");
        json patch = cfg.sweep[k];
        std::string name = "point" + std::to_string(k);
        if (patch.contains("name")) {
            name = patch.at("name").get<std::string>();
            patch.erase("name");
        }
        merged.merge_patch(patch);
        ExperimentConfig point_cfg = parse_config(merged);
        validate_config(point_cfg);
        points.emplace_back(name, std::move(point_cfg));
    }
    std::vector<ResultsBundle> bundles;
    for (auto& [name, point_cfg] : points)
        bundles.push_back(cmd_run(point_cfg, out_dir + "/" + name));
    return bundles;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Distributed online economic dispatch experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    bool no_oracle = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_override, "output directory override");
        cmd->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { seed_given = true; });
        cmd->add_flag("--no-oracle", no_oracle,
                      "skip per-step optima (regret not computed; violation still is)");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment");
    add_common(run_cmd);
    CLI::App* validate_cmd = app.add_subcommand("validate", "static config validation");
    validate_cmd->add_option("--config", config_path, "experiment config file")->required();
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run every sweep point");
    add_common(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (seed_given) {
            cfg.seed = seed_override;
            cfg.synthetic.seed = seed_override;
            cfg.pev.seed = seed_override;
        }
        if (no_oracle) cfg.compute_oracle = false;
        const std::string out_dir = out_override.empty() ? cfg.output_dir : out_override;

        if (app.got_subcommand(validate_cmd)) {
            std::cout << cmd_validate(cfg) << '\n';
            return 0;
        }
        if (app.got_subcommand(run_cmd)) {
            const ResultsBundle bundle = cmd_run(cfg, out_dir);
            std::cout << "run: " << (bundle.run_completed ? "completed" : "blew up")
                      << ", outputs in " << bundle.dir << '\n';
            if (!bundle.run_completed) {
                std::cerr << "numerical blow-up at step " << bundle.failure_step << '\n';
                return 3;
            }
            if (cfg.check_invariants && !bundle.invariants_ok) {
                std::cerr << "invariant checks failed (see invariants.json)\n";
                return 1;
            }
            return 0;
        }
        // sweep
        const auto bundles = cmd_sweep(cfg, out_dir);
        std::cout << "sweep: " << bundles.size() << " bundle(s) under " << out_dir << '\n';
        bool ok = true;
        for (const auto& b : bundles) {
            if (!b.run_completed) return 3;
            ok = ok && b.invariants_ok;
        }
        return ok ? 0 : 1;
    } catch (const ScheduleError& e) {
        std::cerr << "invalid schedule: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const GraphError& e) {
        std::cerr << "invalid graph: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "ingestion error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace odis
