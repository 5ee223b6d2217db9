#include "apfold/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apfold/error.hpp"

namespace apfold {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

EigenResult principal(const SparseMatrix& m, const EigenOptions& opts) {
    return inverse_power(m, gershgorin_lower_bound(m) - 1.0, opts.tol, opts.max_iter);
}

double residual_of(const SparseMatrix& m, const std::vector<double>& v, double mu) {
    const auto mv = m.multiply(v);
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(mv[i] - mu * v[i]));
    return r;
}

}  // namespace

Eigenpair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts) {
    const SparseMatrix minus_l = op.matrix().scaled(-1.0);
    const SparseMatrix minus_lt = minus_l.transpose();
    const auto right = principal(minus_l, opts);
    const auto left = principal(minus_lt, opts);

    for (std::size_t k = 0; k < right.vector.size(); ++k) {
        if (!(right.vector[k] > 0.0) || !(left.vector[k] > 0.0)) {
            std::ostringstream msg;
            msg << "principal eigenvector changes sign at interior node " << k
                << " (non-monotone discretization?)";
            throw StructureError(msg.str());
        }
    }

    const double h = op.grid()->cell_volume();
    Eigenpair e;
    e.phi1 = GridFunction(op.grid(), right.vector);
    std::vector<double> star = left.vector;
    const double pairing = dot(right.vector, star) * h;
    for (auto& v : star) v /= pairing;
    e.phi1_star = GridFunction(op.grid(), std::move(star));

    const auto mphi = minus_l.multiply(e.phi1.values());
    e.lambda1 = dot(e.phi1_star.values(), mphi) / dot(e.phi1_star.values(), e.phi1.values());
    e.lambda1_direct = right.eigenvalue;
    e.lambda1_adjoint = left.eigenvalue;
    e.residual = residual_of(minus_l, e.phi1.vec(), e.lambda1);
    e.residual_adjoint = residual_of(minus_lt, e.phi1_star.vec(), e.lambda1);
    e.iterations = right.iterations + left.iterations;
    return e;
}

double subdomain_lambda1(const DiscreteOperator& op, const std::vector<bool>& submask, const EigenOptions& opts) {
    const Grid& g = *op.grid();
    if (submask.size() != g.size()) throw DimensionError("subdomain_lambda1: mask size does not match the grid");
    if (std::none_of(submask.begin(), submask.end(), [](bool b) { return b; }))
        throw PreconditionError("subdomain_lambda1: empty submask");
    if (!g.connected(submask)) throw PreconditionError("subdomain_lambda1: submask is not connected");
    const SparseMatrix sub = op.matrix().scaled(-1.0).restricted(submask);
    return principal(sub, opts).eigenvalue;
}

namespace {

struct Box {
    int i0, i1, j0, j1;  // inclusive lattice ranges
    std::string name;
};

std::vector<bool> box_mask(const Grid& g, const Box& b) {
    std::vector<bool> m(g.size(), false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto ij = g.lattice(k);
        m[k] = ij[0] >= b.i0 && ij[0] <= b.i1 && ij[1] >= b.j0 && ij[1] <= b.j1;
    }
    return m;
}

std::size_t count(const std::vector<bool>& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), true)); }

}  // namespace

BTildeEstimate estimate_B_tilde(const DiscreteOperator& op, const EigenOptions& opts) {
    const Grid& g = *op.grid();
    BTildeEstimate est;
    est.lambda1 = principal_eigenpair(op, opts).lambda1;
    const std::size_t half = g.size() / 2;
    if (half == 0) throw PreconditionError("estimate_B_tilde: grid too small for a half-measure subdomain");

    std::vector<Box> family;
    if (g.dim() == 1) {
        const int k = static_cast<int>(half);
        const int n_int = static_cast<int>(g.size());
        for (int s = 0; s + k <= n_int; ++s) {
            std::ostringstream name;
            name << "window[" << s + 1 << "," << s + k << "]";
            family.push_back({s + 1, s + k, 0, 0, name.str()});
        }
    } else {
        int ilo = std::numeric_limits<int>::max(), ihi = 0, jlo = std::numeric_limits<int>::max(), jhi = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto ij = g.lattice(k);
            ilo = std::min(ilo, ij[0]);
            ihi = std::max(ihi, ij[0]);
            jlo = std::min(jlo, ij[1]);
            jhi = std::max(jhi, ij[1]);
        }
        const int mi = (ihi - ilo + 1) / 2;
        const int mj = (jhi - jlo + 1) / 2;
        family.push_back({ilo, ilo + mi - 1, jlo, jhi, "left-half"});
        family.push_back({ihi - mi + 1, ihi, jlo, jhi, "right-half"});
        family.push_back({ilo, ihi, jlo, jlo + mj - 1, "bottom-half"});
        family.push_back({ilo, ihi, jhi - mj + 1, jhi, "top-half"});
        const int ci = static_cast<int>(std::lround((ihi - ilo + 1) / std::sqrt(2.0)));
        const int cj = static_cast<int>(std::lround((jhi - jlo + 1) / std::sqrt(2.0)));
        const int oi = ilo + (ihi - ilo + 1 - ci) / 2;
        const int oj = jlo + (jhi - jlo + 1 - cj) / 2;
        family.push_back({oi, oi + ci - 1, oj, oj + cj - 1, "centred"});
    }

    est.eta = std::numeric_limits<double>::infinity();
    for (auto box : family) {
        auto mask = box_mask(g, box);
        // shrink the longer side until the subdomain has at most half the nodes
        while (count(mask) > half) {
            if (box.i1 - box.i0 >= box.j1 - box.j0) {
                if (box.name == "right-half") ++box.i0; else --box.i1;
            } else {
                if (box.name == "top-half") ++box.j0; else --box.j1;
            }
            mask = box_mask(g, box);
        }
        if (count(mask) == 0 || !g.connected(mask)) continue;
        const double gap = subdomain_lambda1(op, mask, opts) - est.lambda1;
        ++est.family_size;
        if (gap < est.eta) {
            est.eta = gap;
            est.minimizer = box.name;
        }
    }
    if (est.family_size == 0) throw StructureError("estimate_B_tilde: no admissible half-measure subdomain");
    est.value = est.lambda1 + est.eta;
    return est;
}

MonotonicityResult check_monotonicity(const DiscreteOperator& op, const GridFunction& potential,
                                      const EigenOptions& opts) {
    if (!potential.grid() || !potential.grid()->same_as(*op.grid()))
        throw DimensionError("check_monotonicity: potential lives on a different grid");
    bool positive = false;
    for (double v : potential.values()) {
        if (v < 0.0) throw PreconditionError("check_monotonicity: potential must be nonnegative");
        positive = positive || v > 0.0;
    }
    if (!positive) throw PreconditionError("check_monotonicity: potential must not vanish identically");
    MonotonicityResult r;
    r.lambda_base = principal_eigenpair(op, opts).lambda1;
    r.lambda_perturbed = principal_eigenpair(with_potential(op, -1.0 * potential), opts).lambda1;
    return r;
}

double hopf_ratio(const Eigenpair& eig) {
    const Grid& g = *eig.phi1.grid();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) m = std::min(m, eig.phi1[k] / g.boundary_distance(k));
    return m;
}

}  // namespace apfold
