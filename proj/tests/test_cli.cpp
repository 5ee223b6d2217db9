#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "apfold/cli.hpp"
#include "support.hpp"

using apfold::cli::run;
namespace at = apfold::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    nlohmann::json summary;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "apfold");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.err = err.str();
    if (!out.str().empty() && out.str().front() == '{') o.summary = nlohmann::json::parse(out.str());
    return o;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("apfold_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

fs::path small_config(const fs::path& dir) {
    fs::create_directories(dir);
    const auto p = dir / "small.json";
    std::ofstream(p) << R"({"grid": {"dim": 1, "n": 101}, "nonlinearity": {"kind": "ramp", "b": 12},
        "solver": {"scan": {"steps": 100}}, "verify": {"no_three_pairs": 6, "no_three_steps": 200, "coercivity_trials": 20}})";
    return p;
}

}  // namespace

TEST_CASE("shortest round-trip formatting") {
    for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, -2.5e-300, 1e22, 0.0}) {
        const auto s = apfold::cli::format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(apfold::cli::format_double(0.1) == "0.1");
    CHECK(apfold::cli::format_double(2.0) == "2");
}

TEST_CASE("eig writes a summary with lambda1 and the echoed config") {
    const auto out = scratch("eig");
    const auto o = invoke({"eig", "-c", at::config_path("laplace_ramp_1d.json").string(), "-o", out.string()});
    REQUIRE(o.code == 0);
    const auto s = nlohmann::json::parse(slurp(out / "eig_summary.json"));
    CHECK(s == o.summary);
    CHECK(s["command"] == "eig");
    CHECK(std::abs(s["results"]["lambda1"].get<double>() - std::numbers::pi * std::numbers::pi) <= 1e-3);
    CHECK(s["timings"].is_null());
    CHECK(fs::exists(s["config_echo_path"].get<std::string>()));
    CHECK(fs::exists(out / "eigen.csv"));
    const auto csv = slurp(out / "eigen.csv");
    CHECK(csv.rfind("node_index,x,phi1,phi1_star\n", 0) == 0);
}

TEST_CASE("scan on the ramp config reads 2...2,1,0...0") {
    const auto out = scratch("scan");
    const auto o = invoke({"scan", "-c", at::config_path("laplace_ramp_1d.json").string(), "-o", out.string(),
                           "--t-min", "-2", "--t-max", "2", "--steps", "81"});
    REQUIRE(o.code == 0);
    const auto counts = o.summary["results"]["counts"].get<std::string>();
    CHECK(counts == std::string(40, '2') + "1" + std::string(40, '0'));
    CHECK(o.summary["results"]["pattern_ok"] == true);
    CHECK(std::abs(o.summary["results"]["t_bar"].get<double>()) <= 1e-4);
    const auto csv = slurp(out / "scan.csv");
    CHECK(csv.rfind("t,count,margin\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 82);
}

TEST_CASE("solve and fiber subcommands") {
    const auto out = scratch("solve");
    const auto cfg = small_config(out / "cfg");
    const auto o = invoke({"solve", "-c", cfg.string(), "-o", out.string(), "--rhs", "phi1-multiple:-1"});
    REQUIRE(o.code == 0);
    CHECK(o.summary["results"]["count"] == 2);
    CHECK(fs::exists(out / "solution_1.csv"));
    CHECK(fs::exists(out / "solution_2.csv"));
    CHECK(o.summary["results"]["ordering"]["min_difference"].get<double>() > 0.0);

    const auto f = invoke({"fiber", "-c", cfg.string(), "-o", out.string(), "--z", "random:3", "--t-min", "-5",
                           "--t-max", "5", "--t-steps", "11"});
    REQUIRE(f.code == 0);
    CHECK(f.summary["results"]["points"] == 11);
    const auto csv = slurp(out / "fiber.csv");
    CHECK(csv.rfind("t,height,w_norm_w2p,u_sup,newton_iters,residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}

TEST_CASE("verify passes on a small config and fails when b is below lambda1") {
    const auto out = scratch("verify");
    const auto o = invoke({"verify", "-c", small_config(out / "cfg").string(), "-o", (out / "ok").string(), "--serial"});
    CHECK(o.code == 0);
    CHECK(o.summary["results"]["passed"] == true);
    CHECK(fs::exists(out / "ok" / "verify.csv"));

    const auto bad = invoke({"verify", "-c", (at::source_dir() / "tests" / "data" / "ramp_b8_below_lambda.json").string(),
                             "-o", (out / "bad").string(), "--serial"});
    CHECK(bad.code == 2);
    bool hyp_failed = false;
    for (const auto& c : bad.summary["results"]["checks"])
        if (c["name"] == "hypotheses") hyp_failed = c["passed"] == false;
    CHECK(hyp_failed);
}

TEST_CASE("solver and config errors exit 1 with a summary") {
    const auto out = scratch("errors");
    const auto miss = invoke({"eig", "-c", "/nonexistent.json", "-o", out.string()});
    CHECK(miss.code == 1);
    CHECK(miss.summary["results"].contains("error"));
    CHECK(fs::exists(out / "eig_summary.json"));

    const auto bad_rhs = invoke({"solve", "-c", small_config(out / "cfg").string(), "-o", out.string(), "--rhs",
                                 "phi1-multiple:abc"});
    CHECK(bad_rhs.code == 1);
    CHECK(invoke({"nosuch", "-c", "x"}).code != 0);
}

TEST_CASE("timings appear only on request") {
    const auto out = scratch("timings");
    const auto cfg = small_config(out / "cfg");
    const auto o = invoke({"eig", "-c", cfg.string(), "-o", out.string(), "--timings"});
    REQUIRE(o.code == 0);
    CHECK(o.summary["timings"]["total_ms"].get<double>() >= 0.0);
}

TEST_CASE("re-running a subcommand is byte-identical") {
    const auto out = scratch("determinism");
    const auto cfg = small_config(out / "cfg");
    const auto run_dir = out / "run";
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"scan", "--z", "random:4"}, {"fiber", "--z", "random"}, {"solve", "--rhs", "phi1-multiple:-0.5"}}) {
        std::vector<std::string> full = args;
        full.insert(full.end(), {"-c", cfg.string(), "-o", run_dir.string()});
        fs::remove_all(run_dir);
        REQUIRE(invoke(full).code == 0);
        const auto first = snapshot(run_dir);
        REQUIRE(invoke(full).code == 0);
        CHECK(snapshot(run_dir) == first);
    }
}
