#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apfold/fiber.hpp"

namespace apfold {

/// The four shapes a continuous height function t -> h(z, t) with linear
/// asymptotics can take, named after their model map.
enum class HeightType {
    increasing,  // s
    decreasing,  // -s
    valley,      // |s|
    fold,        // -|s|
};

std::string to_string(HeightType type);

/// Type predicted from the asymptotic slopes lambda1 - a~ (t -> -inf) and
/// lambda1 - b~ (t -> +inf).
HeightType predicted_height_type(double lambda1, const Nonlinearity& f);

struct ScanSpec {
    double t_lo = -2.0;
    double t_hi = 2.0;
    int steps = 400;
    /// Each widening doubles the bracket on the side where h still rises
    /// towards the end; more than this many is an error.
    int max_widenings = 16;
};

struct FoldReport {
    GridFunction z;
    HeightType type = HeightType::fold;
    double T = 0.0;      // argmax of h(z, .)
    double h_max = 0.0;  // h(z, T)
    FiberPoint at_max;
    double t_lo = 0.0;   // bracket actually scanned
    double t_hi = 0.0;
    int widenings = 0;
    std::size_t unimodality_violations = 0;
    std::vector<double> scan_t;
    std::vector<double> scan_h;

    /// For g = z + s phi1 the equation F(u) = g has 2, 1 or 0 solutions as s
    /// is below, at or above this level.
    double transition_level() const noexcept { return h_max; }
    /// Default transition band 1e-6 max(1, |h_max|).
    double default_tolerance() const noexcept;
};

/// Coarse scan of h(z, .) on a bracket (auto-widened until h rises at the
/// left end and falls at the right end), then golden-section refinement of
/// the maximizer to 1e-8 of the bracket length.
///
/// Throws StructureError when the asymptotic slopes do not give a fold (f
/// linear, b below lambda1, ...) and IterationError when the widening cap is hit.
FoldReport find_fold(const FiberSolver& solver, const GridFunction& z, const ScanSpec& scan = {});

struct SolutionSet {
    GridFunction rhs;
    int count = 0;
    std::vector<GridFunction> solutions;  // ordered by t
    std::vector<double> t_values;
    double transition_margin = 0.0;  // h_max - h_g
    double tolerance = 0.0;
    double h_g = 0.0;
    double T = 0.0;
    double h_max = 0.0;
    /// |F(u) - rhs|_sup for each solution
    std::vector<double> residuals;
};

/// All solutions of F(u) = g. A nonpositive tol_transition selects the
/// report's default band.
SolutionSet count_and_solve(const FiberSolver& solver, const GridFunction& g, double tol_transition = 0.0,
                            const ScanSpec& scan = {});

struct MultiplicityRow {
    double t = 0.0;
    int count = 0;
    double margin = 0.0;
};

/// Counts for g = z0 + t phi1 over the given t values; one fold search on
/// the horizontal part of z0 serves every row.
std::vector<MultiplicityRow> multiplicity_scan(const FiberSolver& solver, const GridFunction& z0,
                                               const std::vector<double>& t_values, double tol_transition = 0.0,
                                               const ScanSpec& scan = {});

/// True iff the counts read 2...2, at most one 1, then 0...0 (any block may be empty).
bool follows_fold_pattern(const std::vector<MultiplicityRow>& rows);

/// Number of sign changes of h(z, .) - level on a uniform scan of [t_lo, t_hi].
int count_level_crossings(const FiberSolver& solver, const GridFunction& z, double level, double t_lo, double t_hi,
                          int steps);

struct NoThreeWitness {
    std::size_t sample = 0;
    double level = 0.0;
    int count = 0;
};

struct NoThreeReport {
    std::vector<int> counts;
    int max_count = 0;
    std::vector<NoThreeWitness> violations;
    bool passed() const noexcept { return violations.empty(); }
};

/// Scan-based falsifier: counts the roots of h(z_k, .) = level_k on a dense
/// scan of a bracket widened until both ends lie below the level. Samples
/// are processed concurrently unless `parallel` is false; results do not
/// depend on the schedule.
NoThreeReport check_no_three(const FiberSolver& solver, const std::vector<GridFunction>& z_samples,
                             const std::vector<double>& levels, int steps = 800, bool parallel = true,
                             const ScanSpec& scan = {});

struct AsymptoticSlopes {
    double T = 0.0;
    double slope_minus = 0.0;  // h(z, -T) / (-T)
    double slope_plus = 0.0;   // h(z, T) / T
    /// |u(z, +-T) / (+-T) - phi1|_sup
    double direction_minus = 0.0;
    double direction_plus = 0.0;
    /// |w(z, +-T)|_W2p
    double w_norm_minus = 0.0;
    double w_norm_plus = 0.0;
};

AsymptoticSlopes asymptotic_slopes(const FiberSolver& solver, const GridFunction& z, double T_large);

/// Shift data of the normal form: t -> t + T and h -> h - h_max.
struct NormalFormShift {
    double tau1 = 0.0;
    double tau2 = 0.0;
};

/// Throws StructureError unless the report is of fold type.
NormalFormShift normal_form_shift(const FoldReport& report);

/// h(z, s + T) - h_max
double shifted_height(const FiberSolver& solver, const FoldReport& report, double s);

struct OrderingCheck {
    bool applicable = false;  // two solutions present
    double min_difference = 0.0;  // min over nodes of u2 - u1
    double V_min = 0.0;
    double V_max = 0.0;
    bool ordered = false;
    bool potential_in_range = false;
    bool passed() const noexcept { return !applicable || (ordered && potential_in_range); }
};

/// For two solutions u1 < u2 (by t), the nodewise sign of u2 - u1 and the
/// potential V = (f(u2) - f(u1)) / (u2 - u1) against [0, b].
OrderingCheck check_two_solution_ordering(const FiberSolver& solver, const SolutionSet& set);

struct ContinuityCheck {
    double T = 0.0;
    std::vector<double> eps;
    std::vector<double> deviations;
    bool decreasing = false;
};

/// |T(z + eps d) - T(z)| for a random horizontal direction d.
ContinuityCheck T_continuity(const FiberSolver& solver, const GridFunction& z, std::uint64_t direction_seed,
                             const std::vector<double>& eps = {1e-1, 1e-2, 1e-3}, const ScanSpec& scan = {});

}  // namespace apfold
