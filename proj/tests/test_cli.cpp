#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "odis/runner.hpp"

using namespace odis;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("odis_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

json synthetic_config(int horizon, std::uint64_t seed) {
    json cfg;
    cfg["scenario"] = {{"kind", "synthetic"}, {"nodes", 5}, {"dims", 3}};
    cfg["graph"] = {{"preset", "switching3"}, {"B", 3}};
    cfg["schedule"] = {{"kappa1", 0.25}, {"kappa2", 0.25}};
    cfg["horizon"] = horizon;
    cfg["seed"] = seed;
    return cfg;
}

std::string write_config(const TempDir& dir, const json& cfg, const std::string& name) {
    const std::string path = dir.file(name);
    std::ofstream out(path);
    out << cfg.dump(2);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args) {
    std::vector<char*> argv;
    args.insert(args.begin(), "odis");
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("cmd_run writes a full bundle for a synthetic config") {
    TempDir dir;
    const auto cfg = parse_config(synthetic_config(200, 5830));
    const auto bundle = cmd_run(cfg, dir.file("out"));
    CHECK(bundle.run_completed);
    CHECK(bundle.invariants_ok);

    const std::string regret = slurp(dir.file("out/regret.csv"));
    int lines = 0;
    for (char c : regret) lines += c == '\n' ? 1 : 0;
    CHECK(lines == 201);  // header + 200 rows
    CHECK(regret.rfind("t,regret_cum", 0) == 0);

    const std::string violation = slurp(dir.file("out/violation.csv"));
    CHECK(violation.rfind("t,violation", 0) == 0);

    const json manifest = json::parse(slurp(dir.file("out/manifest.json")));
    for (const auto& f : manifest.at("files")) {
        const fs::path p = dir.path / "out" / f.get<std::string>();
        CHECK(fs::exists(p));
        CHECK(fs::file_size(p) > 0);
    }
    // Hash in the manifest matches the canonical form of the input document.
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg.raw)));
    CHECK(manifest.at("config_hash").get<std::string>() == expected);

    const json inv = json::parse(slurp(dir.file("out/invariants.json")));
    CHECK(inv.contains("tracking_identity_max_residual"));
    CHECK(inv.contains("dual_bound_ok"));
    CHECK(inv.contains("mixing_bound_ok"));
    CHECK(inv.contains("feasibility_ok"));
    CHECK(inv.at("tracking_identity_max_residual").get<double>() <= 1e-9);
}

TEST_CASE("cmd_run without the oracle still writes violation") {
    TempDir dir;
    auto doc = synthetic_config(50, 1);
    doc["flags"] = {{"compute_oracle", false}};
    const auto bundle = cmd_run(parse_config(doc), dir.file("out"));
    CHECK(bundle.run_completed);
    CHECK_FALSE(fs::exists(dir.file("out/regret.csv")));
    CHECK(fs::exists(dir.file("out/violation.csv")));
}

TEST_CASE("reproducibility: identical configs give bitwise-identical outputs") {
    TempDir dir;
    const auto cfg = parse_config(synthetic_config(120, 77));
    cmd_run(cfg, dir.file("a"));
    cmd_run(cfg, dir.file("b"));
    CHECK(slurp(dir.file("a/regret.csv")) == slurp(dir.file("b/regret.csv")));
    CHECK(slurp(dir.file("a/violation.csv")) == slurp(dir.file("b/violation.csv")));
}

TEST_CASE("cmd_validate accepts the default and names failures") {
    CHECK(cmd_validate(parse_config(synthetic_config(100, 1))).rfind("ok", 0) == 0);

    auto bad_b = synthetic_config(100, 1);
    bad_b["graph"]["B"] = 1;  // the two-edge member alone is disconnected
    CHECK_THROWS_AS(cmd_validate(parse_config(bad_b)), GraphError);

    auto bad_sched = synthetic_config(100, 1);
    bad_sched["schedule"]["kappa2"] = 0.5;
    CHECK_THROWS_AS(cmd_validate(parse_config(bad_sched)), ScheduleError);
}

TEST_CASE("cli exit codes: 0 ok, 2 invalid config, 2 missing csv") {
    TempDir dir;
    const std::string good = write_config(dir, synthetic_config(30, 3), "good.json");
    CHECK(run_cli({"run", "--config", good, "--out", dir.file("runout")}) == 0);
    CHECK(run_cli({"validate", "--config", good}) == 0);

    auto bad = synthetic_config(30, 3);
    bad["schedule"] = {{"kappa1", 0.5}, {"kappa2", 0.25}};
    const std::string bad_path = write_config(dir, bad, "bad.json");
    CHECK(run_cli({"run", "--config", bad_path, "--out", dir.file("badout")}) == 2);

    json dispatch;
    dispatch["scenario"] = {
        {"kind", "dispatch"},
        {"market",
         {{"type", "csv"}, {"path", dir.file("missing.csv")}, {"region", "NSW"}}}};
    dispatch["graph"] = {{"preset", "switching3"}, {"B", 3}};
    dispatch["schedule"] = {{"kappa1", 0.25}, {"kappa2", 0.25}};
    dispatch["horizon"] = 10;
    const std::string miss = write_config(dir, dispatch, "miss.json");
    CHECK(run_cli({"run", "--config", miss, "--out", dir.file("missout")}) == 2);

    const std::string nothere = dir.file("no_such_config.json");
    CHECK(run_cli({"run", "--config", nothere}) == 2);
}

TEST_CASE("sweep runs the step-size grid all-or-nothing") {
    TempDir dir;
    auto doc = synthetic_config(200, 5830);
    doc["sweep"] = json::array({
        json{{"name", "quarter"}, {"schedule", {{"kappa1", 0.25}, {"kappa2", 0.25}}}},
        json{{"name", "eighth"}, {"schedule", {{"kappa1", 0.125}, {"kappa2", 0.125}}}},
        json{{"name", "third"},
             {"schedule", {{"kappa1", 1.0 / 3.0}, {"kappa2", 0.25}}}},
    });
    const auto cfg = parse_config(doc);
    const auto bundles = cmd_sweep(cfg, dir.file("sweep"));
    REQUIRE(bundles.size() == 3);
    for (const char* name : {"quarter", "eighth", "third"}) {
        CHECK(fs::exists(dir.path / "sweep" / name / "regret.csv"));
        CHECK(fs::exists(dir.path / "sweep" / name / "manifest.json"));
    }
    // Time-averaged regret ends below its running peak in every bundle.
    for (const auto& b : bundles) {
        const auto& reg = b.metrics.regret_cum;
        double peak = 0.0;
        for (std::size_t t = 0; t < reg.size(); ++t)
            peak = std::max(peak, reg[t] / static_cast<double>(t + 1));
        CHECK(reg.back() / 200.0 < 0.995 * peak);
    }

    // Empty grid: no bundles, no error.
    auto empty = synthetic_config(60, 5830);
    empty["sweep"] = json::array();
    CHECK(cmd_sweep(parse_config(empty), dir.file("sweep_empty")).empty());

    // One invalid point rejects the whole sweep before any run.
    auto broken = doc;
    broken["sweep"].push_back(json{{"name", "broken"},
                                   {"schedule", {{"kappa1", 0.5}, {"kappa2", 0.25}}}});
    CHECK_THROWS_AS(cmd_sweep(parse_config(broken), dir.file("sweep_bad")), ScheduleError);
    CHECK_FALSE(fs::exists(dir.file("sweep_bad")));
}

TEST_CASE("seed override propagates into scenario construction") {
    TempDir dir;
    const std::string cfg_path = write_config(dir, synthetic_config(40, 1), "c.json");
    CHECK(run_cli({"run", "--config", cfg_path, "--out", dir.file("s1"), "--seed",
                   "424242"}) == 0);
    CHECK(run_cli({"run", "--config", cfg_path, "--out", dir.file("s2"), "--seed",
                   "424242"}) == 0);
    CHECK(run_cli({"run", "--config", cfg_path, "--out", dir.file("s3")}) == 0);
    CHECK(slurp(dir.file("s1/regret.csv")) == slurp(dir.file("s2/regret.csv")));
    CHECK(slurp(dir.file("s1/regret.csv")) != slurp(dir.file("s3/regret.csv")));
}

TEST_CASE("dispatch config with a synthetic market source runs end to end") {
    TempDir dir;
    json doc;
    doc["scenario"] = {{"kind", "dispatch"},
                       {"market", {{"type", "synthetic"}, {"steps", 64}}}};
    doc["graph"] = {{"preset", "switching3"}, {"B", 3}};
    doc["schedule"] = {{"kappa1", 0.25}, {"kappa2", 0.25}};
    doc["horizon"] = 64;
    doc["seed"] = 12;
    const auto bundle = cmd_run(parse_config(doc), dir.file("out"));
    CHECK(bundle.run_completed);
    CHECK(bundle.invariants_ok);
    CHECK(bundle.metrics.regret_cum.size() == 64);
}

TEST_CASE("explicit adjacency sequences are accepted") {
    TempDir dir;
    auto doc = synthetic_config(30, 2);
    doc["scenario"]["nodes"] = 3;
    // Two single-edge graphs whose union is connected: B=2.
    doc["graph"] = {
        {"B", 2},
        {"adjacency",
         json::array({json::array({json::array({1, 1, 0}), json::array({1, 1, 0}),
                                   json::array({0, 0, 1})}),
                      json::array({json::array({1, 0, 0}), json::array({0, 1, 1}),
                                   json::array({0, 1, 1})})})}};
    const auto cfg = parse_config(doc);
    CHECK(cmd_validate(cfg).rfind("ok", 0) == 0);
    const auto bundle = cmd_run(cfg, dir.file("out"));
    CHECK(bundle.run_completed);
}
