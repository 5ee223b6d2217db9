#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apfold/fiber.hpp"
#include "apfold/fold.hpp"
#include "apfold/grid.hpp"
#include "apfold/nonlinearity.hpp"
#include "apfold/operator.hpp"
#include "apfold/spectral.hpp"

namespace apfold {

/// One coefficient group (A, b or c) as a named preset.
struct CoefficientSpec {
    std::string preset = "constant";  // constant | linear | csv
    /// Constant part, one entry per component: (a11, a12, a22), (b1, b2) or (c).
    std::vector<double> value;
    /// Per component, the gradient in (x, y) of the linear preset.
    std::vector<std::array<double, 2>> gradient;
    /// CSV file for the csv preset, resolved against the config directory.
    std::filesystem::path path;
};

struct GridSection {
    int dim = 1;
    std::vector<std::array<double, 2>> bounds{{0.0, 1.0}};
    std::vector<int> n{200};
    std::string mask = "rectangle";
};

struct OperatorSection {
    CoefficientSpec A{"constant", {1.0, 0.0, 1.0}, {}, {}};
    CoefficientSpec b{"constant", {0.0, 0.0}, {}, {}};
    CoefficientSpec c{"constant", {0.0}, {}, {}};
    /// When absent they are computed from the sampled coefficients.
    std::optional<double> lambda_ell;
    std::optional<double> Lambda_ell;
};

struct NonlinearitySection {
    std::string kind = "ramp";
    NonlinearityParams params;
    /// > 0 replaces f by its mollification of this radius.
    double mollify_delta = 0.0;
};

struct SolverSection {
    double tol = 1e-10;
    int max_iter = 100;
    double eig_tol = 1e-10;
    int eig_max_iter = 10000;
    double jacobian_delta = 1e-6;
    ScanSpec scan;
    std::uint64_t seed = 0;
    double p = 2.0;
};

struct VerifySection {
    int no_three_pairs = 20;
    int no_three_steps = 800;
    int coercivity_trials = 100;
    double T_large = 100.0;
};

struct OutputSection {
    std::filesystem::path directory = "out";
    std::vector<std::string> formats{"json", "csv"};
};

struct RunConfig {
    GridSection grid;
    OperatorSection op;
    NonlinearitySection nonlinearity;
    SolverSection solver;
    VerifySection verify;
    OutputSection output;
    std::filesystem::path source;  // file the config was read from
    std::filesystem::path base_dir;

    bool writes(const std::string& format) const;
};

/// Parses and validates a JSON config. Throws ConfigError carrying the line
/// of a syntax error or the dotted name of the offending field.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".",
                       const std::string& source_name = "<string>");

/// The config with every default filled in, in the same format it was read.
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Writes the filled-in config next to the outputs and returns its path.
std::filesystem::path echo_config(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Everything a subcommand needs, built once from a RunConfig. The operator
/// and nonlinearity are stored in normalized form (lower slope a moved into
/// the zero-order term): lambda1 of the user's operator is eigen->lambda1 + a.
struct Problem {
    GridPtr grid;
    std::shared_ptr<const DiscreteOperator> op;
    std::shared_ptr<const Eigenpair> eigen;
    std::shared_ptr<const FiberSolver> solver;
    Nonlinearity f;
    double a = 0.0;
    EigenOptions eig_opts;
    ScanSpec scan;

    double lambda1_original() const { return eigen->lambda1 + a; }
};

GridPtr make_grid(const GridSection& g);
CoefficientField make_coefficients(const RunConfig& cfg, const Grid& grid);
Problem make_problem(const RunConfig& cfg);

}  // namespace apfold
