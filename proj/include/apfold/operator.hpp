#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "apfold/grid.hpp"
#include "apfold/linalg.hpp"

namespace apfold {

/// Coefficients of L = tr(A D^2) + b . grad + c sampled at interior nodes.
/// In 1D only a11, b1 and c are used.
struct CoefficientField {
    std::vector<double> a11, a12, a22;
    std::vector<double> b1, b2;
    std::vector<double> c;
    double lambda_ell = 1.0;
    double Lambda_ell = 1.0;

    /// Constant coefficients on every interior node of `grid`.
    static CoefficientField constant(const Grid& grid, std::array<double, 3> a, std::array<double, 2> b, double c,
                                     double lambda_ell, double Lambda_ell);

    std::size_t size() const noexcept { return a11.size(); }

    /// Checks that the eigenvalues of A lie in [lambda_ell, Lambda_ell] and |b|, |c| <= Lambda_ell at
    /// every node; throws PreconditionError naming the first offending node.
    void validate(const Grid& grid) const;
};

class DiscreteOperator {
public:
    DiscreteOperator(GridPtr grid, std::shared_ptr<const CoefficientField> coeffs, SparseMatrix matrix,
                     bool monotone, std::size_t upwinded_nodes, bool adjoint);

    const GridPtr& grid() const noexcept { return grid_; }
    const std::shared_ptr<const CoefficientField>& coeffs() const noexcept { return coeffs_; }
    /// Matrix of L itself (not -L) on the interior nodes, Dirichlet rows eliminated.
    const SparseMatrix& matrix() const noexcept { return matrix_; }
    /// True iff every off-diagonal entry is >= 0.
    bool monotone() const noexcept { return monotone_; }
    std::size_t upwinded_nodes() const noexcept { return upwinded_; }
    bool is_adjoint() const noexcept { return adjoint_; }

private:
    GridPtr grid_;
    std::shared_ptr<const CoefficientField> coeffs_;
    SparseMatrix matrix_;
    bool monotone_ = true;
    std::size_t upwinded_ = 0;
    bool adjoint_ = false;
};

/// Centred second differences, the positive-type 7-point cross stencil
/// (oriented by the sign of a12) and centred drift, switching a node's drift
/// to one-sided upwind when centring would make an axis coupling negative.
DiscreteOperator assemble(GridPtr grid, const CoefficientField& coeffs);

GridFunction apply(const DiscreteOperator& op, const GridFunction& u);

DiscreteOperator adjoint(const DiscreteOperator& op);

/// L + V (V added to the zero-order coefficient).
DiscreteOperator with_potential(const DiscreteOperator& op, const GridFunction& potential);

/// True iff every off-diagonal entry of the matrix is >= 0.
bool has_nonnegative_off_diagonal(const SparseMatrix& m);

}  // namespace apfold
