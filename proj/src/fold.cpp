#include "apfold/fold.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "apfold/error.hpp"

namespace apfold {

std::string to_string(HeightType type) {
    switch (type) {
        case HeightType::increasing: return "s";
        case HeightType::decreasing: return "-s";
        case HeightType::valley: return "|s|";
        case HeightType::fold: return "-|s|";
    }
    return "?";
}

HeightType predicted_height_type(double lambda1, const Nonlinearity& f) {
    const bool rises_left = lambda1 - f.a_tilde() > 0.0;
    const bool rises_right = lambda1 - f.b_tilde() > 0.0;
    if (rises_left && rises_right) return HeightType::increasing;
    if (!rises_left && !rises_right) return HeightType::decreasing;
    return rises_left ? HeightType::fold : HeightType::valley;
}

double FoldReport::default_tolerance() const noexcept { return 1e-6 * std::max(1.0, std::abs(h_max)); }

namespace {

// Height along one fiber, warm-starting every solve from the last one.
class FiberWalker {
public:
    FiberWalker(const FiberSolver& s, const GridFunction& z) : solver_(s), z_(z) {}

    const FiberPoint& at(double t) {
        last_ = solver_.solve(z_, t, has_last_ ? &last_.w : nullptr);
        has_last_ = true;
        return last_;
    }
    double height(double t) { return at(t).height; }
    void reset(const FiberPoint& p) {
        last_ = p;
        has_last_ = true;
    }

private:
    const FiberSolver& solver_;
    const GridFunction& z_;
    FiberPoint last_;
    bool has_last_ = false;
};

constexpr double kInvPhi = 0.6180339887498948482;

}  // namespace

FoldReport find_fold(const FiberSolver& solver, const GridFunction& z, const ScanSpec& scan) {
    if (!(scan.t_hi > scan.t_lo) || scan.steps < 4) throw PreconditionError("find_fold: need t_lo < t_hi and steps >= 4");
    FoldReport rep;
    rep.z = z;
    rep.type = predicted_height_type(solver.lambda1(), solver.nonlinearity());
    if (rep.type != HeightType::fold) {
        std::ostringstream msg;
        msg << "height function has type " << to_string(rep.type) << " (asymptotic slopes "
            << solver.lambda1() - solver.nonlinearity().a_tilde() << " and "
            << solver.lambda1() - solver.nonlinearity().b_tilde() << "); no fold";
        throw StructureError(msg.str());
    }

    double lo = scan.t_lo, hi = scan.t_hi;
    const auto n = static_cast<std::size_t>(scan.steps);
    std::size_t kmax = 0;
    for (;;) {
        rep.scan_t.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) rep.scan_t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        rep.scan_t[n] = hi;
        const auto trace = solver.trace(z, rep.scan_t);
        rep.scan_h.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) rep.scan_h[i] = trace.points[i].height;
        kmax = static_cast<std::size_t>(std::max_element(rep.scan_h.begin(), rep.scan_h.end()) - rep.scan_h.begin());
        const bool left_ok = kmax > 0 && rep.scan_h[1] > rep.scan_h[0];
        const bool right_ok = kmax < n && rep.scan_h[n - 1] > rep.scan_h[n];
        if (left_ok && right_ok) {
            rep.at_max = trace.points[kmax];
            break;
        }
        if (rep.widenings == scan.max_widenings) {
            std::ostringstream msg;
            msg << "find_fold: bracket cap exceeded after " << rep.widenings << " widenings (bracket [" << lo << ", "
                << hi << "])";
            throw IterationError(msg.str(), rep.scan_h[kmax]);
        }
        const double width = hi - lo;
        if (!left_ok) lo -= width;
        if (!right_ok) hi += width;
        ++rep.widenings;
    }
    rep.t_lo = lo;
    rep.t_hi = hi;
    for (std::size_t i = 0; i < n; ++i) {
        const bool rising = rep.scan_h[i + 1] > rep.scan_h[i];
        if ((i < kmax && !rising) || (i >= kmax && rising)) ++rep.unimodality_violations;
    }

    // golden-section refinement of the maximizer
    double a = rep.scan_t[kmax - 1], b = rep.scan_t[kmax + 1];
    const double tol = 1e-8 * (hi - lo);
    FiberWalker walk(solver, z);
    walk.reset(rep.at_max);
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = walk.height(x1), f2 = walk.height(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = walk.height(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = walk.height(x1);
        }
    }
    const double T = 0.5 * (a + b);
    FiberPoint best = walk.at(T);
    if (best.height < rep.at_max.height) best = rep.at_max;  // the scan sample was already better
    rep.at_max = std::move(best);
    rep.T = rep.at_max.t;
    rep.h_max = rep.at_max.height;
    return rep;
}

namespace {

// Root of h(t) = level inside [a, b] with h(a) < level <= h(b) (or the mirror),
// by bisection to 1e-10 followed by one safeguarded secant step.
FiberPoint bracketed_root(FiberWalker& walk, double level, double a, double ha, double b, double hb) {
    while (std::abs(b - a) > 1e-10) {
        const double m = 0.5 * (a + b);
        const double hm = walk.height(m);
        if ((hm < level) == (ha < level)) {
            a = m;
            ha = hm;
        } else {
            b = m;
            hb = hm;
        }
    }
    double t = 0.5 * (a + b);
    if (hb != ha) {
        const double s = a + (level - ha) * (b - a) / (hb - ha);
        if (s >= std::min(a, b) && s <= std::max(a, b)) t = s;
    }
    return walk.at(t);
}

// Walks from T towards -inf (dir = -1) or +inf (dir = +1) until h drops below level.
FiberPoint side_root(const FiberSolver& solver, const FoldReport& rep, double level, int dir) {
    FiberWalker walk(solver, rep.z);
    walk.reset(rep.at_max);
    double inner = rep.T, h_inner = rep.h_max;
    double outer = std::numeric_limits<double>::quiet_NaN(), h_outer = 0.0;

    // tightest bracket available from the scan data
    const std::size_t n = rep.scan_t.size();
    if (dir < 0) {
        for (std::size_t i = n; i-- > 0;) {
            if (rep.scan_t[i] >= rep.T) continue;
            if (rep.scan_h[i] < level) {
                outer = rep.scan_t[i];
                h_outer = rep.scan_h[i];
                break;
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (rep.scan_t[i] <= rep.T) continue;
            if (rep.scan_h[i] < level) {
                outer = rep.scan_t[i];
                h_outer = rep.scan_h[i];
                break;
            }
        }
    }
    if (std::isnan(outer)) {
        const double slope = dir < 0 ? solver.lambda1() - solver.nonlinearity().a_tilde()
                                     : solver.nonlinearity().b_tilde() - solver.lambda1();
        double d = std::max((rep.t_hi - rep.t_lo) / 2.0, 2.0 * (rep.h_max - level) / std::max(slope, 1e-12));
        for (int k = 0;; ++k) {
            const double t = rep.T + dir * d;
            const double ht = walk.height(t);
            if (ht < level) {
                outer = t;
                h_outer = ht;
                break;
            }
            inner = t;
            h_inner = ht;
            if (k == 60) throw IterationError("count_and_solve: no bracket for the level on one side", ht);
            d *= 2.0;
        }
    }
    return bracketed_root(walk, level, outer, h_outer, inner, h_inner);
}

int classify(double margin, double tol) {
    if (margin > tol) return 2;
    if (margin >= -tol) return 1;
    return 0;
}

}  // namespace

SolutionSet count_and_solve(const FiberSolver& solver, const GridFunction& g, double tol_transition,
                            const ScanSpec& scan) {
    const auto split = solver.projector().project(g);
    const FoldReport rep = find_fold(solver, split.z, scan);
    SolutionSet set;
    set.rhs = g;
    set.h_g = split.h;
    set.T = rep.T;
    set.h_max = rep.h_max;
    set.tolerance = tol_transition > 0.0 ? tol_transition : rep.default_tolerance();
    set.transition_margin = rep.h_max - split.h;
    set.count = classify(set.transition_margin, set.tolerance);

    std::vector<FiberPoint> pts;
    if (set.count == 2) {
        pts.push_back(side_root(solver, rep, split.h, -1));
        pts.push_back(side_root(solver, rep, split.h, +1));
    } else if (set.count == 1) {
        pts.push_back(rep.at_max);
    }
    for (auto& p : pts) {
        set.t_values.push_back(p.t);
        set.residuals.push_back((solver.F(p.u) - g).sup());
        set.solutions.push_back(std::move(p.u));
    }
    return set;
}

std::vector<MultiplicityRow> multiplicity_scan(const FiberSolver& solver, const GridFunction& z0,
                                               const std::vector<double>& t_values, double tol_transition,
                                               const ScanSpec& scan) {
    const auto split = solver.projector().project(z0);
    const FoldReport rep = find_fold(solver, split.z, scan);
    const double tol = tol_transition > 0.0 ? tol_transition : rep.default_tolerance();
    std::vector<MultiplicityRow> rows;
    rows.reserve(t_values.size());
    for (double t : t_values) {
        const double margin = rep.h_max - (t + split.h);
        rows.push_back({t, classify(margin, tol), margin});
    }
    return rows;
}

bool follows_fold_pattern(const std::vector<MultiplicityRow>& rows) {
    int stage = 2;
    int ones = 0;
    for (const auto& r : rows) {
        if (r.count > stage) return false;
        if (r.count == 1 && ++ones > 1) return false;
        stage = r.count;
    }
    return true;
}

int count_level_crossings(const FiberSolver& solver, const GridFunction& z, double level, double t_lo, double t_hi,
                          int steps) {
    if (steps < 1 || !(t_hi > t_lo)) throw PreconditionError("count_level_crossings: bad scan");
    std::vector<double> ts(static_cast<std::size_t>(steps) + 1);
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = t_lo + (t_hi - t_lo) * static_cast<double>(i) / steps;
    const auto tr = solver.trace(z, ts);
    int count = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const bool a = tr.points[i - 1].height < level;
        const bool b = tr.points[i].height < level;
        if (a != b) ++count;
    }
    return count;
}

NoThreeReport check_no_three(const FiberSolver& solver, const std::vector<GridFunction>& z_samples,
                             const std::vector<double>& levels, int steps, bool parallel, const ScanSpec& scan) {
    if (z_samples.size() != levels.size()) throw DimensionError("check_no_three: one level per z sample");
    NoThreeReport rep;
    rep.counts.assign(z_samples.size(), 0);

    const auto one = [&](std::size_t k) {
        const auto split = solver.projector().project(z_samples[k]);
        const double level = levels[k] - split.h;
        // h tends to -inf on both sides, so doubling the bracket outward
        // eventually puts both ends below any level
        double lo = scan.t_lo, hi = scan.t_hi;
        FiberWalker walk(solver, split.z);
        for (int i = 0; walk.height(lo) >= level; ++i) {
            if (i == 60) throw IterationError("check_no_three: cannot bracket the level on the left", level);
            lo -= hi - lo;
        }
        for (int i = 0; walk.height(hi) >= level; ++i) {
            if (i == 60) throw IterationError("check_no_three: cannot bracket the level on the right", level);
            hi += hi - lo;
        }
        return count_level_crossings(solver, split.z, level, lo, hi, steps);
    };

    const std::size_t m = z_samples.size();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = parallel ? std::min<std::size_t>(hw, m) : 1;
    if (workers <= 1) {
        for (std::size_t k = 0; k < m; ++k) rep.counts[k] = one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(m);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k; (k = next.fetch_add(1)) < m;) {
                    try {
                        rep.counts[k] = one(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (std::size_t k = 0; k < m; ++k) {
        rep.max_count = std::max(rep.max_count, rep.counts[k]);
        if (rep.counts[k] > 2) rep.violations.push_back({k, levels[k], rep.counts[k]});
    }
    return rep;
}

AsymptoticSlopes asymptotic_slopes(const FiberSolver& solver, const GridFunction& z, double T_large) {
    if (!(T_large > 0.0)) throw PreconditionError("asymptotic_slopes: T must be positive");
    AsymptoticSlopes s;
    s.T = T_large;
    const auto lo = solver.solve(z, -T_large);
    const auto hi = solver.solve(z, T_large);
    s.slope_minus = lo.height / -T_large;
    s.slope_plus = hi.height / T_large;
    s.direction_minus = lo.w.sup() / T_large;
    s.direction_plus = hi.w.sup() / T_large;
    s.w_norm_minus = discrete_norm(lo.w, NormKind::w2p(solver.p()));
    s.w_norm_plus = discrete_norm(hi.w, NormKind::w2p(solver.p()));
    return s;
}

NormalFormShift normal_form_shift(const FoldReport& report) {
    if (report.type != HeightType::fold)
        throw StructureError("normal form shift needs a height function of type -|s|, got " + to_string(report.type));
    return {report.T, report.h_max};
}

double shifted_height(const FiberSolver& solver, const FoldReport& report, double s) {
    const auto shift = normal_form_shift(report);
    if (s == 0.0) return 0.0;
    return solver.solve(report.z, s + shift.tau1, &report.at_max.w).height - shift.tau2;
}

OrderingCheck check_two_solution_ordering(const FiberSolver& solver, const SolutionSet& set) {
    OrderingCheck c;
    if (set.count != 2) return c;
    c.applicable = true;
    const auto& f = solver.nonlinearity();
    const GridFunction& u1 = set.solutions[0];
    const GridFunction& u2 = set.solutions[1];
    c.min_difference = std::numeric_limits<double>::infinity();
    c.V_min = std::numeric_limits<double>::infinity();
    c.V_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u1.size(); ++k) {
        const double d = u2[k] - u1[k];
        c.min_difference = std::min(c.min_difference, d);
        const double V = d != 0.0 ? (f(u2[k]) - f(u1[k])) / d : f.slope(u1[k]);
        c.V_min = std::min(c.V_min, V);
        c.V_max = std::max(c.V_max, V);
    }
    const double slack = 1e-9 * std::max(1.0, f.b());
    c.ordered = c.min_difference > 0.0;
    c.potential_in_range = c.V_min >= -slack && c.V_max <= f.b() + slack;
    return c;
}

ContinuityCheck T_continuity(const FiberSolver& solver, const GridFunction& z, std::uint64_t direction_seed,
                             const std::vector<double>& eps, const ScanSpec& scan) {
    ContinuityCheck c;
    c.eps = eps;
    const FoldReport base = find_fold(solver, z, scan);
    c.T = base.T;
    const GridFunction d = solver.random_z(direction_seed);
    for (double e : eps) {
        GridFunction zp = z;
        zp.axpy(e, d);
        c.deviations.push_back(std::abs(find_fold(solver, zp, scan).T - base.T));
    }
    const double resolution = 1e-7 * (base.t_hi - base.t_lo);
    c.decreasing = true;
    for (std::size_t i = 1; i < c.deviations.size(); ++i)
        if (c.deviations[i] > c.deviations[i - 1] + resolution) c.decreasing = false;
    return c;
}

}  // namespace apfold
