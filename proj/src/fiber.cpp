#include "apfold/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "apfold/error.hpp"

namespace apfold {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> weighted(const GridFunction& v) {
    const double h = v.grid()->cell_volume();
    std::vector<double> out(v.vec());
    for (auto& x : out) x *= h;
    return out;
}

}  // namespace

Projector::Projector(std::shared_ptr<const Eigenpair> eigen) : eigen_(std::move(eigen)) {
    if (!eigen_) throw PreconditionError("Projector: null eigenpair");
}

double Projector::component(const GridFunction& g) const {
    require_same_grid(g, eigen_->phi1_star, "Projector");
    return inner_product(g, eigen_->phi1_star);
}

Projector::Split Projector::project(const GridFunction& g) const {
    const double h = component(g);
    GridFunction z = g;
    z.axpy(-h, eigen_->phi1);
    return {std::move(z), h};
}

GridFunction Projector::apply(const GridFunction& g) const { return project(g).z; }

GridFunction random_horizontal(const Projector& P, std::uint64_t seed) {
    const auto& grid = P.eigen().phi1.grid();
    std::mt19937_64 rng(seed);
    GridFunction v(grid);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 2.0 * unit_uniform(rng) - 1.0;
    v = P.apply(v);
    const double s = v.sup();
    if (s == 0.0) throw StructureError("random_horizontal: projected noise vanished");
    v *= 1.0 / s;
    return v;
}

FiberSolver::FiberSolver(std::shared_ptr<const DiscreteOperator> op, std::shared_ptr<const Eigenpair> eigen,
                         Nonlinearity f, FiberOptions opts)
    : op_(std::move(op)),
      eigen_(std::move(eigen)),
      projector_(eigen_),
      f_(f),
      jac_f_(f.smooth() ? f : mollify(f, std::max(1e-6, opts.jacobian_delta))),
      opts_(opts) {
    if (!op_) throw PreconditionError("FiberSolver: null operator");
    if (!eigen_->phi1.grid()->same_as(*op_->grid()))
        throw DimensionError("FiberSolver: eigenpair and operator live on different grids");
    if (!(opts_.tol > 0.0)) throw PreconditionError("FiberSolver: tolerance must be positive");
    p_ = opts_.p > 0.0 ? opts_.p : default_exponent(*op_->grid());
    minus_l_ = op_->matrix().scaled(-1.0);

    // Row sums of -L, accumulated in extended precision, let F be evaluated in
    // difference form: (-L u)_i = sum_j m_ij (u_j - u_i) + r_i u_i.
    const auto rp = minus_l_.row_ptr();
    const auto va = minus_l_.values();
    row_sum_.resize(minus_l_.rows());
    for (std::size_t r = 0; r < minus_l_.rows(); ++r) {
        long double s = 0.0L;
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) s += va[k];
        row_sum_[r] = static_cast<double>(s);
    }

    linear_ = std::make_shared<const BorderedSolver>(
        BorderedSystem{minus_l_, eigen_->phi1.vec(), weighted(eigen_->phi1_star)});
}

double FiberSolver::apply_minus_l(const GridFunction& u, std::vector<double>& out) const {
    const auto rp = minus_l_.row_ptr();
    const auto ci = minus_l_.col_index();
    const auto va = minus_l_.values();
    out.assign(u.size(), 0.0);
    double scale = 0.0;
    for (std::size_t r = 0; r < u.size(); ++r) {
        const double ur = u[r];
        double s = 0.0;
        double mag = 0.0;
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
            if (ci[k] == r) continue;
            const double d = va[k] * (u[ci[k]] - ur);
            s += d;
            mag += std::abs(d);
        }
        const double diag = row_sum_[r] * ur;
        out[r] = s + diag;
        scale = std::max(scale, mag + std::abs(diag));
    }
    return scale;
}

GridFunction FiberSolver::F(const GridFunction& u) const {
    require_same_grid(u, eigen_->phi1, "F");
    std::vector<double> out;
    apply_minus_l(u, out);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= f_(u[k]);
    return GridFunction(u.grid(), std::move(out));
}

GridFunction FiberSolver::linear_solve(const GridFunction& z) const {
    require_same_grid(z, eigen_->phi1, "linear_solve");
    auto [w, s] = linear_->solve(z.values(), 0.0);
    (void)s;
    return projector_.apply(GridFunction(z.grid(), std::move(w)));
}

namespace {

struct Evaluation {
    GridFunction G;      // P F(u) - z
    double height = 0.0; // <F(u), phi1*>
    double residual = 0.0;
    double floor = 0.0;  // rounding level of the residual evaluation
};

}  // namespace

FiberPoint FiberSolver::solve(const GridFunction& z_in, double t, const GridFunction* warm_start) const {
    require_same_grid(z_in, eigen_->phi1, "fiber solve");
    const double zc = projector_.component(z_in);
    double star_l1 = 0.0;
    for (double v : eigen_->phi1_star.values()) star_l1 += std::abs(v);
    star_l1 *= op_->grid()->cell_volume();
    if (std::abs(zc) > 1e-8 * (1.0 + z_in.sup()) * star_l1) {
        std::ostringstream msg;
        msg << "fiber solve: z is not horizontal (<z, phi1*> = " << zc << ")";
        throw PreconditionError(msg.str());
    }
    const GridFunction z = projector_.apply(z_in);
    const GridFunction& phi = eigen_->phi1;

    const auto evaluate = [&](const GridFunction& w) {
        GridFunction u = w;
        u.axpy(t, phi);
        std::vector<double> fu;
        const double lscale = apply_minus_l(u, fu);
        double fmag = 0.0;
        for (std::size_t k = 0; k < fu.size(); ++k) {
            const double fk = f_(u[k]);
            fu[k] -= fk;
            fmag = std::max(fmag, std::abs(fk));
        }
        GridFunction Fu(u.grid(), std::move(fu));
        Evaluation e;
        e.height = projector_.component(Fu);
        Fu.axpy(-e.height, phi);
        Fu -= z;
        e.residual = Fu.sup();
        e.G = std::move(Fu);
        e.floor = 64.0 * kEps * (lscale + fmag + z.sup() + std::abs(e.height));
        return e;
    };

    GridFunction w = warm_start ? projector_.apply(*warm_start) : linear_solve(z);
    FiberPoint out;
    out.z = z;
    out.t = t;

    std::vector<double> history;
    Evaluation ev = evaluate(w);
    const auto converged = [&](const GridFunction& wc, const Evaluation& e) {
        GridFunction u = wc;
        u.axpy(t, phi);
        const double thr = std::max(opts_.tol * std::max(1.0, u.sup()), e.floor);
        return std::pair{e.residual <= thr, thr};
    };

    const auto finish = [&](const GridFunction& wf, const Evaluation& e, double thr) {
        out.w = wf;
        out.u = wf;
        out.u.axpy(t, phi);
        out.height = e.height;
        GridFunction fu(out.u.grid());
        for (std::size_t k = 0; k < fu.size(); ++k) fu[k] = f_(out.u[k]);
        out.height_identity = eigen_->lambda1 * t - inner_product(fu, eigen_->phi1_star);
        out.residual = e.residual;
        out.tolerance = thr;
        return out;
    };

    const std::vector<double> border_row = weighted(eigen_->phi1_star);
    bool stalled = false;
    for (int it = 0; it <= opts_.max_iter; ++it) {
        history.push_back(ev.residual);
        const auto [ok, thr] = converged(w, ev);
        if (ok) {
            out.newton_iters = it;
            return finish(w, ev, thr);
        }
        if (it == opts_.max_iter) break;

        GridFunction u = w;
        u.axpy(t, phi);
        std::vector<double> minus_fprime(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) minus_fprime[k] = -jac_f_.slope(u[k]);
        const BorderedSolver jac(BorderedSystem{minus_l_.plus_diagonal(minus_fprime), phi.vec(), border_row});
        std::vector<double> rhs(ev.G.vec());
        for (auto& v : rhs) v = -v;
        auto [dw_raw, mu] = jac.solve(rhs, 0.0);
        (void)mu;
        const GridFunction dw = projector_.apply(GridFunction(w.grid(), std::move(dw_raw)));

        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
            GridFunction trial = w;
            trial.axpy(alpha, dw);
            trial = projector_.apply(trial);
            Evaluation et = evaluate(trial);
            if (et.residual <= (1.0 - 1e-4 * alpha) * ev.residual || converged(trial, et).first) {
                w = std::move(trial);
                ev = std::move(et);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            stalled = true;
            out.newton_iters = it + 1;
            break;
        }
    }
    if (!stalled) out.newton_iters = opts_.max_iter;

    // Damped fixed-point iteration on the linear part of G.
    out.used_fallback = true;
    for (int it = 0; it < opts_.fixed_point_max_iter; ++it) {
        const GridFunction step = linear_solve(ev.G);
        w.axpy(-opts_.damping, step);
        w = projector_.apply(w);
        ev = evaluate(w);
        history.push_back(ev.residual);
        const auto [ok, thr] = converged(w, ev);
        if (ok) return finish(w, ev, thr);
        if (!std::isfinite(ev.residual)) break;
    }
    std::ostringstream msg;
    msg << "fiber solve did not converge at t = " << t << " (last residual " << ev.residual << ")";
    throw SolverError(msg.str(), std::move(history));
}

FiberTrace FiberSolver::trace(const GridFunction& z, const std::vector<double>& t_grid) const {
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw PreconditionError("fiber trace: t grid must be sorted");
    FiberTrace tr;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const GridFunction* warm = i == 0 ? nullptr : &tr.points.back().w;
        tr.points.push_back(solve(z, t_grid[i], warm));
        if (i > 0) {
            const double dt = t_grid[i] - t_grid[i - 1];
            if (dt > 0.0) {
                const double du = (tr.points[i].u - tr.points[i - 1].u).sup();
                tr.lipschitz = std::max(tr.lipschitz, du / dt);
            }
        }
    }
    return tr;
}

GridFunction FiberSolver::psi(const GridFunction& u) const {
    auto split = projector_.project(F(u));
    split.z.axpy(projector_.component(u), eigen_->phi1);
    return split.z;
}

double FiberSolver::coercivity_ratio(const GridFunction& u, const GridFunction& v) const {
    const double den = discrete_norm(u - v, NormKind::w2p(p_));
    if (!(den > 0.0)) throw PreconditionError("coercivity ratio: the two points coincide");
    return discrete_norm(psi(u) - psi(v), NormKind::lp(p_)) / den;
}

CoercivitySample FiberSolver::coercivity_sample(std::size_t trials, std::uint64_t seed) const {
    if (trials == 0) throw PreconditionError("coercivity sample: need at least one trial");
    std::mt19937_64 rng(seed);
    const auto draw = [&](double& t) {
        GridFunction w = random_horizontal(projector_, rng());
        w *= 1.0 / discrete_norm(w, NormKind::w2p(p_));
        w *= 10.0 * unit_uniform(rng);
        t = -10.0 + 20.0 * unit_uniform(rng);
        w.axpy(t, eigen_->phi1);
        return w;
    };
    CoercivitySample s;
    s.c_emp = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trials; ++k) {
        double t1 = 0.0, t2 = 0.0;
        const GridFunction u = draw(t1);
        const GridFunction v = draw(t2);
        if (!(discrete_norm(u - v, NormKind::w2p(p_)) > 0.0)) continue;
        const double r = coercivity_ratio(u, v);
        ++s.trials;
        if (r < s.c_emp) {
            s.c_emp = r;
            s.worst_trial = k;
            s.worst_t = t1;
            s.worst_t_other = t2;
        }
    }
    return s;
}

GridFunction FiberSolver::random_z(std::uint64_t seed) const { return random_horizontal(projector_, seed); }

}  // namespace apfold
