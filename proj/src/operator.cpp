#include "apfold/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apfold/error.hpp"

namespace apfold {

CoefficientField CoefficientField::constant(const Grid& grid, std::array<double, 3> a, std::array<double, 2> b,
                                            double c, double lambda_ell, double Lambda_ell) {
    const std::size_t n = grid.size();
    CoefficientField f;
    f.a11.assign(n, a[0]);
    f.a12.assign(n, a[1]);
    f.a22.assign(n, a[2]);
    f.b1.assign(n, b[0]);
    f.b2.assign(n, b[1]);
    f.c.assign(n, c);
    f.lambda_ell = lambda_ell;
    f.Lambda_ell = Lambda_ell;
    return f;
}

void CoefficientField::validate(const Grid& grid) const {
    const std::size_t n = grid.size();
    for (const auto* v : {&a11, &a12, &a22, &b1, &b2, &c})
        if (v->size() != n) throw DimensionError("coefficient samples do not cover every interior node");
    if (!(lambda_ell > 0.0 && lambda_ell <= Lambda_ell))
        throw PreconditionError("ellipticity bounds must satisfy 0 < lambda_ell <= Lambda_ell");
    const double slack = 1e-12 * std::max(1.0, Lambda_ell);
    for (std::size_t k = 0; k < n; ++k) {
        double lo = a11[k];
        double hi = a11[k];
        double bnorm = std::abs(b1[k]);
        if (grid.dim() == 2) {
            const double mean = 0.5 * (a11[k] + a22[k]);
            const double rad = std::hypot(0.5 * (a11[k] - a22[k]), a12[k]);
            lo = mean - rad;
            hi = mean + rad;
            bnorm = std::hypot(b1[k], b2[k]);
        }
        std::ostringstream where;
        where << " at interior node " << k;
        if (lo < lambda_ell - slack || hi > Lambda_ell + slack)
            throw PreconditionError("spectrum of A leaves [lambda_ell, Lambda_ell]" + where.str());
        if (bnorm > Lambda_ell + slack) throw PreconditionError("|b| exceeds Lambda_ell" + where.str());
        if (std::abs(c[k]) > Lambda_ell + slack) throw PreconditionError("|c| exceeds Lambda_ell" + where.str());
    }
}

DiscreteOperator::DiscreteOperator(GridPtr grid, std::shared_ptr<const CoefficientField> coeffs,
                                   SparseMatrix matrix, bool monotone, std::size_t upwinded_nodes, bool adjoint)
    : grid_(std::move(grid)),
      coeffs_(std::move(coeffs)),
      matrix_(std::move(matrix)),
      monotone_(monotone),
      upwinded_(upwinded_nodes),
      adjoint_(adjoint) {}

bool has_nonnegative_off_diagonal(const SparseMatrix& m) {
    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    const auto va = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
            if (ci[k] != r && va[k] < 0.0) return false;
    return true;
}

DiscreteOperator assemble(GridPtr grid, const CoefficientField& coeffs) {
    if (!grid) throw DimensionError("assemble: null grid");
    const Grid& g = *grid;
    const std::size_t n = g.size();
    for (const auto* v : {&coeffs.a11, &coeffs.b1, &coeffs.c})
        if (v->size() != n) throw DimensionError("assemble: coefficient samples do not cover every interior node");
    if (g.dim() == 2)
        for (const auto* v : {&coeffs.a12, &coeffs.a22, &coeffs.b2})
            if (v->size() != n) throw DimensionError("assemble: coefficient samples do not cover every interior node");

    std::vector<SparseMatrix::Triplet> trip;
    trip.reserve(n * (g.dim() == 2 ? 7 : 3));
    std::size_t upwinded = 0;
    const auto add = [&](std::size_t row, long col, double v) {
        if (col >= 0) trip.push_back({row, static_cast<std::size_t>(col), v});
    };

    for (std::size_t k = 0; k < n; ++k) {
        const double a12 = g.dim() == 2 ? coeffs.a12[k] : 0.0;
        double centre = coeffs.c[k];
        bool upwind_here = false;

        double cross = 0.0;
        if (g.dim() == 2 && a12 != 0.0) {
            cross = std::abs(a12) / (g.spacing(0) * g.spacing(1));
            if (coeffs.a11[k] / (g.spacing(0) * g.spacing(0)) < cross ||
                coeffs.a22[k] / (g.spacing(1) * g.spacing(1)) < cross) {
                const auto x = g.coords(k);
                std::ostringstream msg;
                msg << "cross-term dominance |a12| <= min(a11, a22) violated at interior node " << k << " (x = "
                    << x[0] << ", y = " << x[1] << ")";
                throw AssemblyError(msg.str(), k);
            }
            const int sy = a12 > 0.0 ? 1 : -1;
            add(k, g.neighbor(k, 1, sy), cross);
            add(k, g.neighbor(k, -1, -sy), cross);
            centre += 2.0 * cross;
        }

        for (int axis = 0; axis < g.dim(); ++axis) {
            const double h = g.spacing(axis);
            const double a = axis == 0 ? coeffs.a11[k] : coeffs.a22[k];
            const double b = axis == 0 ? coeffs.b1[k] : coeffs.b2[k];
            const int di = axis == 0 ? 1 : 0;
            const int dj = axis == 0 ? 0 : 1;
            const double axial = a / (h * h) - cross;
            double plus = axial;
            double minus = axial;
            centre -= 2.0 * a / (h * h);
            if (std::abs(b) / (2.0 * h) <= axial) {
                plus += b / (2.0 * h);
                minus -= b / (2.0 * h);
            } else if (b > 0.0) {
                plus += b / h;
                centre -= b / h;
                upwind_here = true;
            } else {
                minus -= b / h;
                centre += b / h;
                upwind_here = true;
            }
            add(k, g.neighbor(k, di, dj), plus);
            add(k, g.neighbor(k, -di, -dj), minus);
        }
        trip.push_back({k, k, centre});
        if (upwind_here) ++upwinded;
    }

    auto matrix = SparseMatrix::from_triplets(n, n, std::move(trip));
    const bool monotone = has_nonnegative_off_diagonal(matrix);
    return DiscreteOperator(std::move(grid), std::make_shared<const CoefficientField>(coeffs), std::move(matrix),
                            monotone, upwinded, false);
}

GridFunction apply(const DiscreteOperator& op, const GridFunction& u) {
    if (!u.grid() || !u.grid()->same_as(*op.grid()) || u.size() != op.matrix().cols())
        throw DimensionError("apply: function lives on a different grid than the operator");
    return GridFunction(op.grid(), op.matrix().multiply(u.values()));
}

DiscreteOperator adjoint(const DiscreteOperator& op) {
    auto t = op.matrix().transpose();
    const bool monotone = has_nonnegative_off_diagonal(t);
    return DiscreteOperator(op.grid(), op.coeffs(), std::move(t), monotone, op.upwinded_nodes(), !op.is_adjoint());
}

DiscreteOperator with_potential(const DiscreteOperator& op, const GridFunction& potential) {
    if (!potential.grid() || !potential.grid()->same_as(*op.grid()))
        throw DimensionError("with_potential: potential lives on a different grid");
    return DiscreteOperator(op.grid(), op.coeffs(), op.matrix().plus_diagonal(potential.values()), op.monotone(),
                            op.upwinded_nodes(), op.is_adjoint());
}

}  // namespace apfold
