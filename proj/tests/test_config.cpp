#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <numbers>

#include "apfold/config.hpp"
#include "apfold/error.hpp"
#include "support.hpp"

using namespace apfold;
namespace at = apfold::testing;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("apfold_config_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
    const auto cfg = parse_config(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "ramp", "b": 12}})");
    CHECK(cfg.grid.n == std::vector<int>{200});
    CHECK(cfg.solver.p == 2.0);
    CHECK(cfg.solver.tol == 1e-10);
    CHECK(cfg.solver.seed == 0);
    CHECK(cfg.output.directory == fs::path("out"));
    CHECK(cfg.writes("json"));
    CHECK(cfg.writes("csv"));
    const auto j = to_json(cfg);
    CHECK(j["grid"]["n"][0] == 200);
    CHECK(j["solver"]["tol"] == 1e-10);
    CHECK(j["solver"]["p"] == 2.0);
    CHECK(j["nonlinearity"]["kind"] == "ramp");

    const auto cfg2 = parse_config(R"({"grid": {"dim": 2}, "nonlinearity": {"kind": "ramp", "b": 30}})");
    CHECK(cfg2.solver.p == 2.0);
    CHECK(cfg2.grid.n.size() == 2);
}

TEST_CASE("the echoed config reads back to the same defaults") {
    const auto cfg = parse_config(R"({"grid": {"dim": 1, "n": 64}, "nonlinearity": {"kind": "smooth_ramp", "b": 12},
                                     "solver": {"seed": 9, "scan": {"steps": 100}}})");
    const auto dir = scratch("echo");
    const auto path = echo_config(cfg, dir);
    CHECK(fs::exists(path));
    const auto again = load_config(path);
    CHECK(to_json(again).dump() == to_json(cfg).dump());
    CHECK(again.solver.seed == 9);
    CHECK(again.solver.scan.steps == 100);
}

TEST_CASE("missing grid section names the grid field") {
    CHECK(field_of(R"({"nonlinearity": {"kind": "ramp", "b": 12}})") == "grid");
}

TEST_CASE("validation errors name the offending field") {
    CHECK(field_of(R"({"grid": {"dim": 3}, "nonlinearity": {"kind": "ramp", "b": 12}})") == "grid.dim");
    CHECK(field_of(R"({"grid": {"dim": 1, "n": 2}, "nonlinearity": {"kind": "ramp", "b": 12}})") == "grid.n");
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "ramp", "b": 12}, "solver": {"tol": -1}})") ==
          "solver.tol");
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "ramp", "a": 3, "b": 2}})") == "nonlinearity.b");
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"b": 2}})") == "nonlinearity.kind");
    CHECK(field_of(R"({"grid": {"dim": 1, "nn": 5}, "nonlinearity": {"kind": "ramp", "b": 12}})") == "grid.nn");
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "ramp", "b": 12}, "output": {"formats": ["xml"]}})") ==
          "output.formats");
}

TEST_CASE("syntax errors report the line") {
    try {
        (void)parse_config("{\n  \"grid\": {\"dim\": 1},\n  \"nonlinearity\": {\"kind\": \"ramp\" \"b\": 12}\n}", ".", "bad.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.json:3") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("csv coefficient paths must exist and parse") {
    const auto dir = scratch("csv");
    {
        std::ofstream out(dir / "c.csv");
        out << "c\n";
        for (int i = 0; i < 9; ++i) out << -0.5 * i / 8.0 << "\n";
    }
    const std::string ok = R"({"grid": {"dim": 1, "n": 11}, "operator": {"c": {"preset": "csv", "path": "c.csv"}},
                             "nonlinearity": {"kind": "ramp", "b": 12}})";
    const auto cfg = parse_config(ok, dir);
    const auto grid = make_grid(cfg.grid);
    const auto coeffs = make_coefficients(cfg, *grid);
    REQUIRE(coeffs.c.size() == 9);
    CHECK(coeffs.c[8] == doctest::Approx(-0.5));

    const std::string missing = R"({"grid": {"dim": 1, "n": 11}, "operator": {"c": {"preset": "csv", "path": "nope.csv"}},
                                  "nonlinearity": {"kind": "ramp", "b": 12}})";
    try {
        const auto bad = parse_config(missing, dir);
        (void)make_coefficients(bad, *make_grid(bad.grid));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field().rfind("operator.c", 0) == 0);
    }
}

TEST_CASE("linear coefficient preset and computed ellipticity bounds") {
    const auto cfg = parse_config(R"({"grid": {"dim": 2, "n": [9, 9]},
        "operator": {"A": [2.0, 0.5, 1.0], "b": {"preset": "linear", "value": [1.0, 0.0], "gradient": [[2.0, 0.0], [0.0, 0.0]]}},
        "nonlinearity": {"kind": "ramp", "b": 30}})");
    const auto g = make_grid(cfg.grid);
    const auto c = make_coefficients(cfg, *g);
    for (std::size_t k = 0; k < g->size(); ++k) CHECK(c.b1[k] == doctest::Approx(1.0 + 2.0 * g->coords(k)[0]));
    const double disc = std::sqrt(0.25 + 0.25);
    CHECK(c.lambda_ell == doctest::Approx(1.5 - disc));
    CHECK(c.Lambda_ell >= 1.5 + disc);
    for (std::size_t k = 0; k < g->size(); ++k) CHECK(c.Lambda_ell >= std::abs(c.b1[k]));
}

TEST_CASE("normalization by the lower slope shifts c and the stored eigenvalue") {
    const auto plain = make_problem(parse_config(at::line_config(120, R"({"kind": "ramp", "b": 12})")));
    const auto shifted = make_problem(parse_config(at::line_config(120, R"({"kind": "ramp", "a": -3, "b": 9})")));
    CHECK(shifted.a == -3.0);
    CHECK(shifted.f.b() == 12.0);
    CHECK(shifted.lambda1_original() == doctest::Approx(plain.lambda1_original()).epsilon(1e-10));
    CHECK(shifted.eigen->lambda1 == doctest::Approx(plain.eigen->lambda1 + 3.0).epsilon(1e-10));
    for (double s : {-2.0, -0.5, 0.0, 0.7, 3.0}) CHECK(shifted.f(s) == doctest::Approx(12.0 * std::max(s, 0.0)));
}

TEST_CASE("b below lambda1 loads but fails the hypotheses") {
    const auto cfg = load_config(at::source_dir() / "tests" / "data" / "ramp_b8_below_lambda.json");
    const auto pr = make_problem(cfg);
    CHECK(pr.lambda1_original() == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-4));
    const auto rep = validate_AP(pr.f, pr.eigen->lambda1, estimate_B_tilde(*pr.op).value);
    CHECK_FALSE(rep.lambda_below_b);
    CHECK_FALSE(rep.passed());
}

TEST_CASE("every shipped config loads") {
    const auto configs = at::shipped_configs();
    CHECK(configs.size() >= 4);
    for (const auto& p : configs) {
        CAPTURE(p.string());
        CHECK_NOTHROW(load_config(p));
    }
}

TEST_CASE("table nonlinearity reads a two-column csv") {
    const auto dir = scratch("table");
    std::ofstream(dir / "f.csv") << "s,f\n-10,0\n0,0\n10,120\n";
    const auto cfg = parse_config(R"({"grid": {"dim": 1, "n": 41}, "nonlinearity": {"kind": "table", "table": "f.csv", "b": 12}})",
                                  dir);
    REQUIRE(cfg.nonlinearity.params.table.size() == 3);
    const auto pr = make_problem(cfg);
    for (double s : {-5.0, -1.0, 0.5, 4.0}) CHECK(pr.f(s) == doctest::Approx(12.0 * std::max(s, 0.0)));
    const auto again = parse_config(to_json(cfg).dump(), dir);
    CHECK(again.nonlinearity.params.table == cfg.nonlinearity.params.table);
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "table", "table": "missing.csv", "b": 12}})") ==
          "nonlinearity.table");
}

TEST_CASE("kind-specific keys may be nested under params") {
    const auto flat = parse_config(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "affine", "slope": 3, "intercept": 1}})");
    const auto nested =
        parse_config(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "affine", "params": {"slope": 3, "intercept": 1}}})");
    CHECK(to_json(flat).dump() == to_json(nested).dump());
    CHECK(field_of(R"({"grid": {"dim": 1}, "nonlinearity": {"kind": "affine", "params": {"width": 3}}})") ==
          "nonlinearity.params.width");
}
