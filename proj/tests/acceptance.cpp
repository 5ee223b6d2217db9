// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "apfold/config.hpp"
#include "apfold/fold.hpp"
#include "support.hpp"

using namespace apfold;
namespace at = apfold::testing;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
    bool passed = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
}

Problem load(const std::string& name) { return make_problem(load_config(at::config_path(name))); }

std::vector<Problem> shipped_problems() {
    std::vector<Problem> out;
    for (const auto& p : at::shipped_configs()) out.push_back(make_problem(load_config(p)));
    return out;
}

Verdict eigenvalue_accuracy() {
    std::string d;
    bool ok = true;
    for (double beta : {0.0, 2.0}) {
        const auto g = at::unit_interval(200);
        const auto t0 = std::chrono::steady_clock::now();
        const auto e = principal_eigenpair(at::laplacian(g, beta));
        const double secs = seconds_since(t0);
        const double exact = pi * pi + beta * beta / 4.0;
        const double err = std::abs(e.lambda1 - exact);
        ok = ok && err <= (beta == 0.0 ? 1e-3 : 1e-2) && secs < 1.0;
        d += "beta=" + fmt(beta) + " err=" + fmt(err) + " t=" + fmt(secs) + "s; ";
    }
    return {ok, d};
}

Verdict adjoint_consistency(const std::vector<Problem>& problems) {
    bool ok = true;
    double worst = 0.0, min_pos = std::numeric_limits<double>::infinity();
    for (const auto& pr : problems) {
        const auto& e = *pr.eigen;
        const double gap = std::abs(e.lambda1_direct - e.lambda1_adjoint);
        worst = std::max(worst, gap);
        min_pos = std::min({min_pos, e.phi1.min(), e.phi1_star.min()});
        ok = ok && gap <= 1e-8 && e.phi1.min() > 0.0 && e.phi1_star.min() > 0.0;
    }
    return {ok, "configs=" + std::to_string(problems.size()) + " max gap=" + fmt(worst) + " min entry=" + fmt(min_pos)};
}

// Semismooth Newton for -L u - b u^+ = g with dense factorizations; each
// step solves J(u) u_new = g exactly because F(u) = J(u) u for the ramp.
std::optional<Eigen::VectorXd> dense_ramp_newton(const Eigen::MatrixXd& minus_L, double b, const Eigen::VectorXd& g,
                                                 Eigen::VectorXd u) {
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd J = minus_L;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (u(i) > 0.0) J(i, i) -= b;
        const Eigen::VectorXd next = J.partialPivLu().solve(g);
        const bool settled = ((next.array() > 0.0) == (u.array() > 0.0)).all();
        u = next;
        if (settled) break;
    }
    const Eigen::VectorXd F = minus_L * u - b * u.cwiseMax(0.0) - g;
    if (F.lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + g.lpNorm<Eigen::Infinity>())) return std::nullopt;
    return u;
}

Verdict exact_multiplicity() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pr = load("laplace_ramp_1d.json");
    const FiberSolver& S = *pr.solver;
    const double l1 = S.lambda1(), b = S.nonlinearity().b();
    const auto& phi = pr.eigen->phi1;

    const auto fold = find_fold(S, GridFunction(pr.grid), pr.scan);
    const auto rows = multiplicity_scan(S, GridFunction(pr.grid), linspace(-2.0, 2.0, 81), 0.0, pr.scan);
    std::string counts;
    for (const auto& r : rows) counts += static_cast<char>('0' + r.count);
    const bool pattern = follows_fold_pattern(rows) && rows.front().count == 2 && rows.back().count == 0;
    const double t_bar = fold.h_max;  // z0 = 0 so t_bar is the fold level

    const auto set = count_and_solve(S, -1.0 * phi, 0.0, pr.scan);
    bool values = set.count == 2;
    double verr = 0.0;
    if (values) {
        verr = std::max(std::abs(set.t_values[0] + 1.0 / l1), std::abs(set.t_values[1] - 1.0 / (b - l1)));
        values = verr <= 1e-4;
    }

    const Eigen::MatrixXd minus_L = -at::dense(pr.op->matrix());
    const Eigen::VectorXd g = -at::to_eigen(phi.vec());
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int converged = 0, unmatched = 0;
    for (int s = 0; s < 64; ++s) {
        const double amp = 5.0 * std::abs(U(rng)), along = 3.0 * U(rng);
        Eigen::VectorXd u0(g.size());
        for (Eigen::Index i = 0; i < u0.size(); ++i) u0(i) = amp * U(rng) + along * phi[static_cast<std::size_t>(i)];
        const auto u = dense_ramp_newton(minus_L, b, g, u0);
        if (!u) continue;
        ++converged;
        bool matched = false;
        for (const auto& sol : set.solutions)
            matched = matched || (*u - at::to_eigen(sol.vec())).lpNorm<Eigen::Infinity>() <= 1e-6;
        if (!matched) ++unmatched;
    }
    const double secs = seconds_since(t0);
    const bool ok = pattern && std::abs(t_bar) <= 1e-4 && values && converged >= 50 && unmatched == 0 && secs < 30.0;
    return {ok, "counts=" + counts + " t_bar=" + fmt(t_bar) + " t_value err=" + fmt(verr) + " newton starts converged=" +
                    std::to_string(converged) + " third solutions=" + std::to_string(unmatched) + " t=" + fmt(secs) + "s"};
}

Verdict height_asymptotics() {
    const auto pr = load("smooth_ramp_1d.json");
    const FiberSolver& S = *pr.solver;
    const double l1 = S.lambda1(), b = S.nonlinearity().b();
    const auto z = S.random_z(0);
    const auto a1 = asymptotic_slopes(S, z, 100.0);
    const auto a2 = asymptotic_slopes(S, z, 200.0);
    const double em1 = std::abs(a1.slope_minus - l1), ep1 = std::abs(a1.slope_plus - (l1 - b));
    const double em2 = std::abs(a2.slope_minus - l1), ep2 = std::abs(a2.slope_plus - (l1 - b));
    const bool ok = em1 <= 0.05 * l1 && ep1 <= 0.05 * std::abs(l1 - b) && em2 < em1 && ep2 < ep1;
    return {ok, "rel err T=100: " + fmt(em1 / l1) + ", " + fmt(ep1 / std::abs(l1 - b)) + "; T=200: " + fmt(em2 / l1) +
                    ", " + fmt(ep2 / std::abs(l1 - b))};
}

Verdict fiber_verticality(const std::vector<Problem>& problems) {
    bool ok = true;
    double worst = 0.0;
    for (const auto& pr : problems) {
        const FiberSolver& S = *pr.solver;
        const auto z = S.random_z(0);
        const auto far = asymptotic_slopes(S, z, 100.0);
        const auto near = asymptotic_slopes(S, z, 10.0);
        const double rm = (far.w_norm_minus / 100.0) / (near.w_norm_minus / 10.0);
        const double rp = (far.w_norm_plus / 100.0) / (near.w_norm_plus / 10.0);
        worst = std::max({worst, rm, rp});
        ok = ok && rm <= 0.5 && rp <= 0.5;
    }
    return {ok, "configs=" + std::to_string(problems.size()) + " worst ratio=" + fmt(worst)};
}

Verdict no_three(const std::vector<Problem>& problems) {
    bool ok = true;
    int max_count = 0, twos = 0;
    for (const auto& pr : problems) {
        std::mt19937_64 rng(777);
        std::vector<GridFunction> zs;
        std::vector<double> levels;
        for (int k = 0; k < 20; ++k) {
            zs.push_back(pr.solver->random_z(rng()));
            levels.push_back(-5.0 + 6.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53);
        }
        const auto rep = check_no_three(*pr.solver, zs, levels, 400, true, pr.scan);
        ok = ok && rep.passed() && rep.max_count <= 2;
        max_count = std::max(max_count, rep.max_count);
        twos += static_cast<int>(std::count(rep.counts.begin(), rep.counts.end(), 2));
    }
    return {ok, "pairs=" + std::to_string(20 * problems.size()) + " max count=" + std::to_string(max_count) +
                    " pairs with two roots=" + std::to_string(twos)};
}

Verdict eigenvalue_laws() {
    const auto g = at::unit_interval(200);
    const auto op = at::laplacian(g);
    const auto ind = GridFunction::sample(g, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
    const auto mono = check_monotonicity(op, ind);
    const double gap = mono.lambda_perturbed - mono.lambda_base;

    std::vector<bool> sub(g->size());
    for (std::size_t k = 0; k < g->size(); ++k) sub[k] = g->coords(k)[0] < 0.8;
    const double l_sub = subdomain_lambda1(op, sub);
    const double l_full = principal_eigenpair(op).lambda1;

    const auto g201 = at::unit_interval(201);
    const auto bt = estimate_B_tilde(at::laplacian(g201));
    const double berr = std::abs(bt.value - 4 * pi * pi);
    const bool ok = gap > 0.0 && gap < 1.0 && l_sub > l_full && berr <= 1e-2;
    return {ok, "potential gap=" + fmt(gap) + " lambda1(0,0.8)=" + fmt(l_sub) + " > " + fmt(l_full) +
                    " B~ err=" + fmt(berr)};
}

Verdict coercivity() {
    std::vector<double> c;
    for (int n : {100, 200}) {
        const auto pr = make_problem(parse_config(at::line_config(n, R"({"kind": "smooth_ramp", "b": 12})")));
        c.push_back(pr.solver->coercivity_sample(100, 0).c_emp);
    }
    const double change = std::abs(c[1] - c[0]) / c[0];
    return {c[0] > 0.0 && c[1] > 0.0 && change < 0.5,
            "c_emp n=100: " + fmt(c[0]) + " n=200: " + fmt(c[1]) + " change=" + fmt(change)};
}

Verdict two_solution_ordering(const std::vector<Problem>& problems) {
    bool ok = true;
    int cases = 0;
    double min_diff = std::numeric_limits<double>::infinity(), vmin = min_diff, vmax = -min_diff;
    for (const auto& pr : problems) {
        const FiberSolver& S = *pr.solver;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto z = S.random_z(seed);
            const auto fold = find_fold(S, z, pr.scan);
            for (double depth : {0.05, 1.0, 4.0}) {
                const auto set = count_and_solve(S, z + (fold.h_max - depth) * pr.eigen->phi1, 0.0, pr.scan);
                if (set.count != 2) continue;
                ++cases;
                const auto ord = check_two_solution_ordering(S, set);
                // normalized potential, so [0, b] here is [a, b] for the user's f
                ok = ok && ord.min_difference > 0.0 && ord.V_min >= 0.0 && ord.V_max <= S.nonlinearity().b();
                min_diff = std::min(min_diff, ord.min_difference);
                vmin = std::min(vmin, ord.V_min);
                vmax = std::max(vmax, ord.V_max / S.nonlinearity().b());
            }
        }
    }
    ok = ok && cases > 0;
    return {ok, "two-solution cases=" + std::to_string(cases) + " min(u2-u1)=" + fmt(min_diff) +
                    " min V=" + fmt(vmin) + " max V/b=" + fmt(vmax)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[e.path().filename().string()] = ss.str();
    }
    return files;
}

Verdict determinism() {
    bool ok = true;
    std::string d;
    for (const std::string name : {"laplace_ramp_1d", "drift_ramp_1d"}) {
        const fs::path out = fs::path(APFOLD_BINARY_DIR) / "acceptance_out" / name;
        fs::remove_all(out);
        const std::string cmd = std::string("\"") + APFOLD_CLI_PATH + "\" verify -c \"" +
                                at::config_path(name + ".json").string() + "\" -o \"" + out.string() + "\" > /dev/null";
        const int first = std::system(cmd.c_str());
        const auto a = snapshot(out);
        const int second = std::system(cmd.c_str());
        const auto b = snapshot(out);
        const bool same = a == b && !a.empty();
        ok = ok && first == 0 && second == 0 && same;
        d += name + ": exit " + std::to_string(first) + "/" + std::to_string(second) + ", " +
             std::to_string(a.size()) + " files " + (same ? "identical" : "DIFFER") + "; ";
    }
    return {ok, d};
}

}  // namespace

int main() {
    const auto problems = shipped_problems();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"eigenvalue accuracy", eigenvalue_accuracy},
        {"adjoint consistency", [&] { return adjoint_consistency(problems); }},
        {"exact multiplicity", exact_multiplicity},
        {"height asymptotics", height_asymptotics},
        {"fiber verticality", [&] { return fiber_verticality(problems); }},
        {"no three preimages", [&] { return no_three(problems); }},
        {"eigenvalue laws", eigenvalue_laws},
        {"coercivity sampling", coercivity},
        {"two-solution ordering", [&] { return two_solution_ordering(problems); }},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.passed) ++failures;
        std::printf("%s criterion %zu (%s): %s\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
