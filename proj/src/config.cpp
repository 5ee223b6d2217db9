#include "apfold/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "apfold/error.hpp"

namespace apfold {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

bool RunConfig::writes(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what, field);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
}

const json& section(const json& root, const char* name, bool required) {
    static const json empty = json::object();
    if (!root.contains(name)) {
        if (required) throw ConfigError(std::string("missing required section '") + name + "'", name);
        return empty;
    }
    if (!root[name].is_object()) fail(name, "must be an object");
    return root[name];
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    if (!obj[key].is_number()) fail(where + "." + key, "must be a number");
    return obj[key].get<double>();
}

int integer(const json& obj, const std::string& where, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail(where + "." + key, "must be an integer");
    return obj[key].get<int>();
}

std::vector<double> number_list(const json& v, const std::string& field) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(field, "must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(field, "must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

CoefficientSpec coefficient(const json& op, const char* key, CoefficientSpec fallback) {
    const std::string field = std::string("operator.") + key;
    if (!op.contains(key)) return fallback;
    const json& v = op[key];
    CoefficientSpec spec;
    if (v.is_number() || v.is_array()) {
        spec.value = number_list(v, field);
        return spec;
    }
    if (!v.is_object()) fail(field, "must be a number, an array or a preset object");
    reject_unknown(v, field, {"preset", "value", "gradient", "path"});
    spec.preset = v.value("preset", std::string("constant"));
    if (spec.preset == "csv") {
        if (!v.contains("path") || !v["path"].is_string()) fail(field + ".path", "csv preset needs a file path");
        spec.path = v["path"].get<std::string>();
        return spec;
    }
    if (spec.preset != "constant" && spec.preset != "linear")
        fail(field + ".preset", "unknown preset '" + spec.preset + "' (constant, linear, csv)");
    if (!v.contains("value")) fail(field + ".value", "required by the " + spec.preset + " preset");
    spec.value = number_list(v["value"], field + ".value");
    if (spec.preset == "linear") {
        if (!v.contains("gradient") || !v["gradient"].is_array()) fail(field + ".gradient", "linear preset needs gradients");
        for (const auto& g : v["gradient"]) {
            const auto comp = number_list(g, field + ".gradient");
            if (comp.empty() || comp.size() > 2) fail(field + ".gradient", "each gradient has one or two entries");
            spec.gradient.push_back({comp[0], comp.size() > 1 ? comp[1] : 0.0});
        }
        if (spec.gradient.size() != spec.value.size())
            fail(field + ".gradient", "one gradient per component of value");
    }
    return spec;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

namespace {
using Table = std::vector<std::pair<std::string, std::vector<double>>>;
Table read_csv(const std::filesystem::path& path, const std::string& field);
}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const std::string& source_name) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream msg;
        msg << source_name << ":" << line_of(text, e.byte) << ": " << e.what();
        throw ConfigError(msg.str(), "");
    }
    if (!root.is_object()) throw ConfigError(source_name + ": top level must be an object", "");
    reject_unknown(root, "", {"grid", "operator", "nonlinearity", "solver", "verify", "output"});

    RunConfig cfg;
    cfg.base_dir = base_dir;

    const json& g = section(root, "grid", true);
    reject_unknown(g, "grid", {"dim", "bounds", "n", "mask"});
    cfg.grid.dim = integer(g, "grid", "dim", 1);
    if (cfg.grid.dim != 1 && cfg.grid.dim != 2) fail("grid.dim", "must be 1 or 2");
    const auto dim = static_cast<std::size_t>(cfg.grid.dim);
    cfg.grid.bounds.assign(dim, {0.0, 1.0});
    if (g.contains("bounds")) {
        if (!g["bounds"].is_array() || g["bounds"].size() != dim) fail("grid.bounds", "one [lo, hi] pair per axis");
        for (std::size_t i = 0; i < dim; ++i) {
            const auto b = number_list(g["bounds"][i], "grid.bounds");
            if (b.size() != 2 || !(b[0] < b[1])) fail("grid.bounds", "each axis needs lo < hi");
            cfg.grid.bounds[i] = {b[0], b[1]};
        }
    }
    cfg.grid.n.assign(dim, 200);
    if (g.contains("n")) {
        const auto n = number_list(g["n"], "grid.n");
        if (n.size() != 1 && n.size() != dim) fail("grid.n", "one entry, or one per axis");
        for (std::size_t i = 0; i < dim; ++i) {
            const double v = n.size() == 1 ? n[0] : n[i];
            if (v != std::floor(v) || v < 3) fail("grid.n", "point counts must be integers >= 3");
            cfg.grid.n[i] = static_cast<int>(v);
        }
    }
    if (g.contains("mask")) {
        if (!g["mask"].is_string()) fail("grid.mask", "must be a preset name");
        cfg.grid.mask = g["mask"].get<std::string>();
        try {
            (void)mask_from_string(cfg.grid.mask);
        } catch (const Error& e) {
            fail("grid.mask", e.what());
        }
    }

    const json& op = section(root, "operator", false);
    reject_unknown(op, "operator", {"A", "b", "c", "lambda_ell", "Lambda_ell"});
    cfg.op.A = coefficient(op, "A", cfg.op.A);
    cfg.op.b = coefficient(op, "b", cfg.op.b);
    cfg.op.c = coefficient(op, "c", cfg.op.c);
    // null means "compute from the sampled coefficients", as written by the echo
    if (op.contains("lambda_ell") && !op["lambda_ell"].is_null()) cfg.op.lambda_ell = number(op, "operator", "lambda_ell", 0.0);
    if (op.contains("Lambda_ell") && !op["Lambda_ell"].is_null()) cfg.op.Lambda_ell = number(op, "operator", "Lambda_ell", 0.0);

    json nl = section(root, "nonlinearity", true);
    reject_unknown(nl, "nonlinearity", {"kind", "a", "b", "params", "table", "slope", "intercept", "mollify_delta"});
    if (nl.contains("params")) {
        // kind-specific keys may sit in a nested params object
        const json params = nl["params"];
        if (!params.is_object()) fail("nonlinearity.params", "must be an object");
        reject_unknown(params, "nonlinearity.params", {"table", "slope", "intercept"});
        for (const auto& [key, value] : params.items()) {
            if (nl.contains(key)) fail("nonlinearity.params." + key, "given both inside and outside params");
            nl[key] = value;
        }
        nl.erase("params");
    }
    if (!nl.contains("kind") || !nl["kind"].is_string()) fail("nonlinearity.kind", "required string");
    cfg.nonlinearity.kind = nl["kind"].get<std::string>();
    auto& p = cfg.nonlinearity.params;
    p.a = number(nl, "nonlinearity", "a", 0.0);
    p.b = number(nl, "nonlinearity", "b", 0.0);
    p.slope = number(nl, "nonlinearity", "slope", 0.0);
    p.intercept = number(nl, "nonlinearity", "intercept", 0.0);
    cfg.nonlinearity.mollify_delta = number(nl, "nonlinearity", "mollify_delta", 0.0);
    if (nl.contains("table") && nl["table"].is_string()) {
        // two-column CSV (s, f(s)); the echo stores the pairs inline
        const std::filesystem::path rel = nl["table"].get<std::string>();
        const Table t = read_csv(rel.is_absolute() ? rel : base_dir / rel, "nonlinearity.table");
        if (t.size() != 2) fail("nonlinearity.table", "CSV needs exactly two columns s,f");
        for (std::size_t i = 0; i < t[0].second.size(); ++i) p.table.emplace_back(t[0].second[i], t[1].second[i]);
    } else if (nl.contains("table")) {
        if (!nl["table"].is_array()) fail("nonlinearity.table", "CSV path or array of [s, f(s)] pairs");
        for (const auto& row : nl["table"]) {
            const auto pair = number_list(row, "nonlinearity.table");
            if (pair.size() != 2) fail("nonlinearity.table", "array of [s, f(s)] pairs");
            p.table.emplace_back(pair[0], pair[1]);
        }
    }
    if (cfg.nonlinearity.mollify_delta < 0.0) fail("nonlinearity.mollify_delta", "must be >= 0");
    try {
        (void)make_preset(cfg.nonlinearity.kind, p);
    } catch (const PreconditionError& e) {
        fail(cfg.nonlinearity.kind == "ramp" || cfg.nonlinearity.kind == "smooth_ramp" ? "nonlinearity.b"
                                                                                         : "nonlinearity",
             e.what());
    }

    const json& so = section(root, "solver", false);
    reject_unknown(so, "solver", {"tol", "max_iter", "eig_tol", "eig_max_iter", "jacobian_delta", "scan", "seed", "p"});
    auto& s = cfg.solver;
    s.tol = number(so, "solver", "tol", s.tol);
    s.max_iter = integer(so, "solver", "max_iter", s.max_iter);
    s.eig_tol = number(so, "solver", "eig_tol", s.eig_tol);
    s.eig_max_iter = integer(so, "solver", "eig_max_iter", s.eig_max_iter);
    s.jacobian_delta = number(so, "solver", "jacobian_delta", s.jacobian_delta);
    s.p = number(so, "solver", "p", std::max(2.0, static_cast<double>(cfg.grid.dim)));
    if (so.contains("seed")) {
        if (!so["seed"].is_number_unsigned()) fail("solver.seed", "must be a nonnegative integer");
        s.seed = so["seed"].get<std::uint64_t>();
    }
    for (const auto& [name, v] : {std::pair{"solver.tol", s.tol}, {"solver.eig_tol", s.eig_tol},
                                  {"solver.jacobian_delta", s.jacobian_delta}})
        if (!(v > 0.0)) fail(name, "tolerances must be positive");
    if (s.max_iter < 1) fail("solver.max_iter", "must be >= 1");
    if (s.eig_max_iter < 1) fail("solver.eig_max_iter", "must be >= 1");
    if (!(s.p >= 1.0)) fail("solver.p", "must be >= 1");
    if (so.contains("scan")) {
        const json& sc = so["scan"];
        if (!sc.is_object()) fail("solver.scan", "must be an object");
        reject_unknown(sc, "solver.scan", {"t_lo", "t_hi", "steps", "max_widenings"});
        s.scan.t_lo = number(sc, "solver.scan", "t_lo", s.scan.t_lo);
        s.scan.t_hi = number(sc, "solver.scan", "t_hi", s.scan.t_hi);
        s.scan.steps = integer(sc, "solver.scan", "steps", s.scan.steps);
        s.scan.max_widenings = integer(sc, "solver.scan", "max_widenings", s.scan.max_widenings);
    }
    if (!(s.scan.t_lo < s.scan.t_hi)) fail("solver.scan", "needs t_lo < t_hi");
    if (s.scan.steps < 4) fail("solver.scan.steps", "must be >= 4");

    const json& ve = section(root, "verify", false);
    reject_unknown(ve, "verify", {"no_three_pairs", "no_three_steps", "coercivity_trials", "T_large"});
    cfg.verify.no_three_pairs = integer(ve, "verify", "no_three_pairs", cfg.verify.no_three_pairs);
    cfg.verify.no_three_steps = integer(ve, "verify", "no_three_steps", cfg.verify.no_three_steps);
    cfg.verify.coercivity_trials = integer(ve, "verify", "coercivity_trials", cfg.verify.coercivity_trials);
    cfg.verify.T_large = number(ve, "verify", "T_large", cfg.verify.T_large);
    if (cfg.verify.no_three_pairs < 1) fail("verify.no_three_pairs", "must be >= 1");
    if (cfg.verify.no_three_steps < 10) fail("verify.no_three_steps", "must be >= 10");
    if (cfg.verify.coercivity_trials < 1) fail("verify.coercivity_trials", "must be >= 1");
    if (!(cfg.verify.T_large > 10.0)) fail("verify.T_large", "must exceed 10");

    const json& out = section(root, "output", false);
    reject_unknown(out, "output", {"directory", "formats"});
    if (out.contains("directory")) {
        if (!out["directory"].is_string()) fail("output.directory", "must be a string");
        cfg.output.directory = out["directory"].get<std::string>();
    }
    if (out.contains("formats")) {
        if (!out["formats"].is_array()) fail("output.formats", "must be an array of strings");
        cfg.output.formats.clear();
        for (const auto& f : out["formats"]) {
            if (!f.is_string() || (f != "json" && f != "csv")) fail("output.formats", "entries are \"json\" or \"csv\"");
            cfg.output.formats.push_back(f.get<std::string>());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string(), "");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    RunConfig cfg = parse_config(buf.str(), base, path.string());
    cfg.source = path;
    return cfg;
}

namespace {

ojson coefficient_json(const CoefficientSpec& c) {
    ojson j;
    j["preset"] = c.preset;
    if (c.preset == "csv") {
        j["path"] = c.path.generic_string();
        return j;
    }
    j["value"] = c.value;
    if (c.preset == "linear") {
        ojson g = ojson::array();
        for (const auto& v : c.gradient) g.push_back({v[0], v[1]});
        j["gradient"] = g;
    }
    return j;
}

}  // namespace

ojson to_json(const RunConfig& cfg) {
    ojson j;
    auto& g = j["grid"];
    g["dim"] = cfg.grid.dim;
    g["bounds"] = ojson::array();
    for (const auto& b : cfg.grid.bounds) g["bounds"].push_back({b[0], b[1]});
    g["n"] = cfg.grid.n;
    g["mask"] = cfg.grid.mask;
    auto& op = j["operator"];
    op["A"] = coefficient_json(cfg.op.A);
    op["b"] = coefficient_json(cfg.op.b);
    op["c"] = coefficient_json(cfg.op.c);
    op["lambda_ell"] = cfg.op.lambda_ell ? ojson(*cfg.op.lambda_ell) : ojson(nullptr);
    op["Lambda_ell"] = cfg.op.Lambda_ell ? ojson(*cfg.op.Lambda_ell) : ojson(nullptr);
    auto& nl = j["nonlinearity"];
    const auto& p = cfg.nonlinearity.params;
    nl["kind"] = cfg.nonlinearity.kind;
    nl["a"] = p.a;
    nl["b"] = p.b;
    if (!p.table.empty()) {
        nl["table"] = ojson::array();
        for (const auto& [x, y] : p.table) nl["table"].push_back({x, y});
    }
    if (cfg.nonlinearity.kind == "affine") {
        nl["slope"] = p.slope;
        nl["intercept"] = p.intercept;
    }
    nl["mollify_delta"] = cfg.nonlinearity.mollify_delta;
    auto& s = j["solver"];
    s["tol"] = cfg.solver.tol;
    s["max_iter"] = cfg.solver.max_iter;
    s["eig_tol"] = cfg.solver.eig_tol;
    s["eig_max_iter"] = cfg.solver.eig_max_iter;
    s["jacobian_delta"] = cfg.solver.jacobian_delta;
    s["scan"] = {{"t_lo", cfg.solver.scan.t_lo},
                 {"t_hi", cfg.solver.scan.t_hi},
                 {"steps", cfg.solver.scan.steps},
                 {"max_widenings", cfg.solver.scan.max_widenings}};
    s["seed"] = cfg.solver.seed;
    s["p"] = cfg.solver.p;
    j["verify"] = {{"no_three_pairs", cfg.verify.no_three_pairs},
                   {"no_three_steps", cfg.verify.no_three_steps},
                   {"coercivity_trials", cfg.verify.coercivity_trials},
                   {"T_large", cfg.verify.T_large}};
    j["output"] = {{"directory", cfg.output.directory.generic_string()}, {"formats", cfg.output.formats}};
    return j;
}

std::filesystem::path echo_config(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / "config_echo.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string(), "output.directory");
    out << to_json(cfg).dump(2) << '\n';
    return path;
}

GridPtr make_grid(const GridSection& g) {
    Domain d;
    d.dim = g.dim;
    for (std::size_t i = 0; i < static_cast<std::size_t>(g.dim); ++i) d.bounds[i] = {g.bounds[i][0], g.bounds[i][1]};
    d.mask = mask_from_string(g.mask);
    std::array<int, 2> n{g.n[0], g.dim == 2 ? g.n[1] : 1};
    return std::make_shared<const Grid>(d, n);
}

namespace {

Table read_csv(const std::filesystem::path& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) fail(field, "cannot open " + path.string());
    std::string line;
    Table cols;
    if (!std::getline(in, line)) fail(field, path.string() + " is empty");
    {
        std::stringstream ss(line);
        std::string name;
        while (std::getline(ss, name, ',')) {
            name.erase(std::remove_if(name.begin(), name.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); }),
                       name.end());
            cols.push_back({name, {}});
        }
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= cols.size()) fail(field, path.string() + ":" + std::to_string(row) + ": too many columns");
            const auto first = cell.find_first_not_of(" \t\r");
            const auto last = cell.find_last_not_of(" \t\r");
            double v = 0.0;
            const char* b = first == std::string::npos ? cell.data() : cell.data() + first;
            const char* e = last == std::string::npos ? cell.data() : cell.data() + last + 1;
            const auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e)
                fail(field, path.string() + ":" + std::to_string(row) + ": not a number: '" + cell + "'");
            cols[c++].second.push_back(v);
        }
        if (c != cols.size()) fail(field, path.string() + ":" + std::to_string(row) + ": too few columns");
    }
    return cols;
}

const std::vector<double>* column(const Table& t, const std::string& name) {
    for (const auto& [n, v] : t)
        if (n == name) return &v;
    return nullptr;
}

// Samples one coefficient group into `targets` (one vector per component).
void sample(const CoefficientSpec& spec, const std::string& field, const std::vector<std::string>& names,
            const std::vector<double>& defaults, const RunConfig& cfg, const Grid& grid,
            const std::vector<std::vector<double>*>& targets) {
    const std::size_t n = grid.size();
    if (spec.preset == "csv") {
        const auto path = spec.path.is_absolute() ? spec.path : cfg.base_dir / spec.path;
        const Table t = read_csv(path, field + ".path");
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto* col = column(t, names[i]);
            if (!col) {
                if (i >= defaults.size() || std::isnan(defaults[i])) fail(field + ".path", "missing column " + names[i]);
                targets[i]->assign(n, defaults[i]);
                continue;
            }
            if (col->size() != n)
                fail(field + ".path", "column " + names[i] + " has " + std::to_string(col->size()) + " rows, grid has " +
                                          std::to_string(n) + " interior nodes");
            *targets[i] = *col;
        }
        return;
    }
    // constant / linear: missing trailing components take their defaults
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double v0 = i < spec.value.size() ? spec.value[i] : defaults[i];
        const std::array<double, 2> grad =
            spec.preset == "linear" && i < spec.gradient.size() ? spec.gradient[i] : std::array<double, 2>{0.0, 0.0};
        targets[i]->resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto x = grid.coords(k);
            (*targets[i])[k] = v0 + grad[0] * x[0] + (grid.dim() == 2 ? grad[1] * x[1] : 0.0);
        }
    }
    if (spec.value.size() > names.size()) fail(field + ".value", "too many components");
}

}  // namespace

CoefficientField make_coefficients(const RunConfig& cfg, const Grid& grid) {
    CoefficientField c;
    const double nan = std::nan("");
    if (grid.dim() == 1) {
        // A given as (a) in 1D; a 3-vector is accepted and only a11 is used.
        sample(cfg.op.A, "operator.A", {"a11", "a12", "a22"}, {nan, 0.0, 1.0}, cfg, grid, {&c.a11, &c.a12, &c.a22});
        sample(cfg.op.b, "operator.b", {"b1", "b2"}, {0.0, 0.0}, cfg, grid, {&c.b1, &c.b2});
    } else {
        sample(cfg.op.A, "operator.A", {"a11", "a12", "a22"}, {nan, 0.0, nan}, cfg, grid, {&c.a11, &c.a12, &c.a22});
        sample(cfg.op.b, "operator.b", {"b1", "b2"}, {0.0, 0.0}, cfg, grid, {&c.b1, &c.b2});
    }
    sample(cfg.op.c, "operator.c", {"c"}, {0.0}, cfg, grid, {&c.c});
    for (const auto* v : {&c.a11, &c.a22})
        for (double x : *v)
            if (std::isnan(x)) fail("operator.A", "diagonal entries of A are required");

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double a_lo = c.a11[k], a_hi = c.a11[k], bn = std::abs(c.b1[k]);
        if (grid.dim() == 2) {
            const double mean = 0.5 * (c.a11[k] + c.a22[k]);
            const double rad = std::hypot(0.5 * (c.a11[k] - c.a22[k]), c.a12[k]);
            a_lo = mean - rad;
            a_hi = mean + rad;
            bn = std::hypot(c.b1[k], c.b2[k]);
        }
        lo = std::min(lo, a_lo);
        hi = std::max({hi, a_hi, bn, std::abs(c.c[k])});
    }
    c.lambda_ell = cfg.op.lambda_ell.value_or(lo);
    c.Lambda_ell = cfg.op.Lambda_ell.value_or(hi);
    try {
        c.validate(grid);
    } catch (const PreconditionError& e) {
        fail("operator", e.what());
    }
    return c;
}

Problem make_problem(const RunConfig& cfg) {
    Problem pr;
    try {
        pr.grid = make_grid(cfg.grid);
    } catch (const PreconditionError& e) {
        fail("grid", e.what());
    }
    CoefficientField coeffs = make_coefficients(cfg, *pr.grid);

    const auto& nl = cfg.nonlinearity;
    pr.a = nl.kind == "affine" ? 0.0 : nl.params.a;
    // Normalization: f - a id against L + a leaves F(u) = -Lu - f(u) unchanged.
    for (auto& v : coeffs.c) {
        v += pr.a;
        coeffs.Lambda_ell = std::max(coeffs.Lambda_ell, std::abs(v));
    }
    pr.op = std::make_shared<const DiscreteOperator>(assemble(pr.grid, coeffs));
    pr.eig_opts = {cfg.solver.eig_tol, cfg.solver.eig_max_iter};
    pr.eigen = std::make_shared<const Eigenpair>(principal_eigenpair(*pr.op, pr.eig_opts));

    pr.f = make_preset(nl.kind, nl.params);
    if (nl.mollify_delta > 0.0) pr.f = mollify(pr.f, nl.mollify_delta);

    FiberOptions fo;
    fo.tol = cfg.solver.tol;
    fo.max_iter = cfg.solver.max_iter;
    fo.jacobian_delta = cfg.solver.jacobian_delta;
    fo.p = cfg.solver.p;
    pr.solver = std::make_shared<const FiberSolver>(pr.op, pr.eigen, pr.f, fo);
    pr.scan = cfg.solver.scan;
    return pr;
}

}  // namespace apfold
