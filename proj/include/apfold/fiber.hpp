#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "apfold/grid.hpp"
#include "apfold/linalg.hpp"
#include "apfold/nonlinearity.hpp"
#include "apfold/operator.hpp"
#include "apfold/spectral.hpp"

namespace apfold {

/// Splitting g = z + h phi1 with <z, phi1*> = 0.
class Projector {
public:
    explicit Projector(std::shared_ptr<const Eigenpair> eigen);

    struct Split {
        GridFunction z;
        double h = 0.0;
    };

    Split project(const GridFunction& g) const;
    /// P g = g - <g, phi1*> phi1
    GridFunction apply(const GridFunction& g) const;
    double component(const GridFunction& g) const;

    const Eigenpair& eigen() const noexcept { return *eigen_; }

private:
    std::shared_ptr<const Eigenpair> eigen_;
};

struct FiberOptions {
    /// Convergence threshold for the sup norm of P F(u) - z, relative to max(1, |u|_sup).
    double tol = 1e-10;
    int max_iter = 100;
    /// Mollification radius for Jacobians of kinked nonlinearities (floored at 1e-6).
    double jacobian_delta = 1e-6;
    /// Step length of the fixed-point fallback.
    double damping = 0.5;
    int fixed_point_max_iter = 2000;
    /// Sobolev exponent of the W^{2,p} and L^p diagnostics; 0 selects max(2, dim).
    double p = 0.0;
};

struct FiberPoint {
    GridFunction z;
    double t = 0.0;
    GridFunction w;
    GridFunction u;
    double height = 0.0;
    /// lambda1 t - <f(u), phi1*>, which agrees with `height` on converged points.
    double height_identity = 0.0;
    int newton_iters = 0;
    bool used_fallback = false;
    /// |P F(u) - z|_sup at the returned iterate.
    double residual = 0.0;
    /// Threshold the residual was tested against.
    double tolerance = 0.0;
};

struct FiberTrace {
    std::vector<FiberPoint> points;
    /// max over consecutive samples of |u(t2) - u(t1)|_sup / |t2 - t1|
    double lipschitz = 0.0;
};

struct CoercivitySample {
    double c_emp = 0.0;
    std::size_t worst_trial = 0;
    double worst_t = 0.0;
    double worst_t_other = 0.0;
    std::size_t trials = 0;
};

/// Solves P F(w + t phi1) = z for w in W, where F(u) = -L u - f(u).
///
/// Thread-safe: every method is const and the cached factorization of the
/// linear part is read-only.
class FiberSolver {
public:
    FiberSolver(std::shared_ptr<const DiscreteOperator> op, std::shared_ptr<const Eigenpair> eigen, Nonlinearity f,
                FiberOptions opts = {});

    const DiscreteOperator& op() const noexcept { return *op_; }
    const Eigenpair& eigen() const noexcept { return *eigen_; }
    const Projector& projector() const noexcept { return projector_; }
    const Nonlinearity& nonlinearity() const noexcept { return f_; }
    const FiberOptions& options() const noexcept { return opts_; }
    const GridPtr& grid() const noexcept { return op_->grid(); }
    double lambda1() const noexcept { return eigen_->lambda1; }
    double p() const noexcept { return p_; }

    /// F(u) = -L u - f(u)
    GridFunction F(const GridFunction& u) const;

    /// (-L|_W)^{-1} z, the fiber through z when f vanishes.
    GridFunction linear_solve(const GridFunction& z) const;

    FiberPoint solve(const GridFunction& z, double t, const GridFunction* warm_start = nullptr) const;
    double height(const GridFunction& z, double t) const { return solve(z, t).height; }

    /// Fibers at every t of a sorted grid, each solve warm-started from the previous one.
    FiberTrace trace(const GridFunction& z, const std::vector<double>& t_grid) const;

    /// Psi(u) = P F(u) + <u, phi1*> phi1
    GridFunction psi(const GridFunction& u) const;
    /// |Psi(u) - Psi(v)|_Lp / |u - v|_W2p; throws PreconditionError for identical inputs.
    double coercivity_ratio(const GridFunction& u, const GridFunction& v) const;
    /// Minimum of coercivity_ratio over random pairs u = w + t phi1 with w a unit
    /// W^{2,p} direction in W scaled by [0, 10] and t in [-10, 10].
    CoercivitySample coercivity_sample(std::size_t trials, std::uint64_t seed) const;

    /// Random element of Z with sup norm 1 (projected white noise).
    GridFunction random_z(std::uint64_t seed) const;

private:
    /// out = -L u in difference form; returns the largest row magnitude
    /// sum_j |m_ij (u_j - u_i)| + |r_i u_i|, the scale of its rounding error.
    double apply_minus_l(const GridFunction& u, std::vector<double>& out) const;

    std::shared_ptr<const DiscreteOperator> op_;
    std::shared_ptr<const Eigenpair> eigen_;
    Projector projector_;
    Nonlinearity f_;
    Nonlinearity jac_f_;
    FiberOptions opts_;
    double p_ = 2.0;
    SparseMatrix minus_l_;
    std::vector<double> row_sum_;
    std::shared_ptr<const BorderedSolver> linear_;
};

/// Random element of W (or Z) with sup norm 1: white noise on the interior
/// nodes with its phi1 component removed.
GridFunction random_horizontal(const Projector& P, std::uint64_t seed);

}  // namespace apfold
