#pragma once

#include <string>
#include <vector>

#include "apfold/grid.hpp"
#include "apfold/operator.hpp"

namespace apfold {

struct EigenOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

/// Principal eigentriple of -L: -L phi1 = lambda1 phi1, -L^T phi1* = lambda1 phi1*,
/// both strictly positive, normalized by sup(phi1) = 1 and <phi1, phi1*> = 1.
struct Eigenpair {
    double lambda1 = 0.0;
    GridFunction phi1;
    GridFunction phi1_star;
    /// Eigenvalues from the independent iterations on -L and on -L^T.
    double lambda1_direct = 0.0;
    double lambda1_adjoint = 0.0;
    /// Sup-norm residuals of the two eigen-equations at lambda1.
    double residual = 0.0;
    double residual_adjoint = 0.0;
    int iterations = 0;
    std::string normalization = "sup(phi1)=1, <phi1,phi1*>=1";
};

Eigenpair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts = {});

/// Principal eigenvalue of -L restricted to the interior nodes flagged in
/// `submask` (Dirichlet on the rest). The submask must be nonempty and connected.
double subdomain_lambda1(const DiscreteOperator& op, const std::vector<bool>& submask,
                         const EigenOptions& opts = {});

struct BTildeEstimate {
    double value = 0.0;   // lambda1 + eta_hat
    double lambda1 = 0.0;
    double eta = 0.0;     // min over the family of (subdomain lambda1 - lambda1)
    std::string minimizer;
    std::size_t family_size = 0;
    bool heuristic = true;
};

/// B~ = lambda1 + eta with eta taken over a fixed family of half-measure
/// subdomains: every contiguous window in 1D; half-rectangles and a centred
/// rectangle in 2D. Exact in 1D, an upper proxy in 2D.
BTildeEstimate estimate_B_tilde(const DiscreteOperator& op, const EigenOptions& opts = {});

struct MonotonicityResult {
    double lambda_base = 0.0;
    double lambda_perturbed = 0.0;
};

/// Principal eigenvalues of -L and of -L + V for a potential V >= 0, V != 0.
MonotonicityResult check_monotonicity(const DiscreteOperator& op, const GridFunction& potential,
                                      const EigenOptions& opts = {});

/// min over interior nodes of phi1 / d: the qualitative Hopf check.
double hopf_ratio(const Eigenpair& eig);

}  // namespace apfold
