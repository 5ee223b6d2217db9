#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace apfold {

/// Compressed-row sparse matrix with sorted column indices per row.
class SparseMatrix {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    /// Duplicate (row, col) entries are summed; explicit zeros are kept so the
    /// sparsity pattern reflects the stencil.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_index() const noexcept { return col_; }
    std::span<const double> values() const noexcept { return values_; }

    double at(std::size_t r, std::size_t c) const;
    std::vector<double> diagonal_entries() const;

    std::vector<double> multiply(std::span<const double> x) const;
    void multiply(std::span<const double> x, std::span<double> y) const;

    SparseMatrix transpose() const;
    SparseMatrix scaled(double s) const;
    /// this + diag(d)
    SparseMatrix plus_diagonal(std::span<const double> d) const;
    /// Principal submatrix on the rows/columns whose flag is set.
    SparseMatrix restricted(const std::vector<bool>& keep) const;

    double norm_inf() const;
    std::size_t lower_bandwidth() const;
    std::size_t upper_bandwidth() const;

    bool operator==(const SparseMatrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> values_;
};

/// LU with partial pivoting of a banded matrix (row interchanges stay inside
/// the band, upper band widened by the lower bandwidth for fill-in).
class BandedLU {
public:
    static BandedLU factor(const SparseMatrix& m);

    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const noexcept { return n_; }
    /// ||Mx - r||_inf / (||M|| ||x|| + ||r||) measured on a pseudo-random r
    /// right after factoring.
    double sampled_residual() const noexcept { return sampled_residual_; }

private:
    double& at(std::size_t i, std::size_t j) { return band_[i * width_ + (j + kl_ - i)]; }
    double at(std::size_t i, std::size_t j) const { return band_[i * width_ + (j + kl_ - i)]; }

    std::size_t n_ = 0;
    std::size_t kl_ = 0;
    std::size_t ku_ = 0;
    std::size_t width_ = 0;
    std::vector<double> band_;
    std::vector<std::size_t> pivot_;
    double sampled_residual_ = 0.0;
};

/// Dense LU with partial pivoting, used for small or border-augmented systems.
class DenseLU {
public:
    static DenseLU factor(std::size_t n, std::vector<double> row_major);
    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<double> lu_;
    std::vector<std::size_t> pivot_;
};

/// The (n+1) x (n+1) matrix [[M, p], [q^T, 0]].
struct BorderedSystem {
    SparseMatrix core;
    std::vector<double> border_col;  // p
    std::vector<double> border_row;  // q
};

/// Factors a bordered system once and solves it for many right-hand sides.
/// Uses block elimination on the banded factorization of the core with two
/// steps of iterative refinement; falls back to a dense factorization of the
/// whole bordered matrix when the core is singular or refinement stalls.
class BorderedSolver {
public:
    explicit BorderedSolver(BorderedSystem sys);

    std::pair<std::vector<double>, double> solve(std::span<const double> rhs, double scalar_rhs) const;
    bool used_dense_fallback() const noexcept { return dense_ != nullptr; }

private:
    std::pair<std::vector<double>, double> solve_block(std::span<const double> rhs, double scalar_rhs) const;
    std::pair<std::vector<double>, double> solve_dense(const DenseLU& lu, std::span<const double> rhs,
                                                       double scalar_rhs) const;
    std::shared_ptr<const DenseLU> build_dense() const;
    double residual(std::span<const double> rhs, double scalar_rhs, const std::vector<double>& x, double s,
                    std::vector<double>* r, double* r_scalar) const;

    BorderedSystem sys_;
    std::shared_ptr<const BandedLU> core_;
    std::vector<double> core_inv_p_;
    double schur_ = 0.0;
    std::shared_ptr<const DenseLU> dense_;
};

std::pair<std::vector<double>, double> solve_bordered(const BorderedSystem& sys, std::span<const double> rhs,
                                                      double scalar_rhs);

struct EigenResult {
    double eigenvalue = 0.0;
    std::vector<double> vector;  // sup-norm 1, largest-magnitude entry positive
    double residual = 0.0;       // ||(M - mu I) v||_inf / ||v||_inf
    int iterations = 0;
};

/// Shifted inverse iteration v <- (M - shift I)^{-1} v from the all-ones
/// vector. The shift stays fixed, so iterates stay nonnegative whenever
/// M - shift I is inverse-positive.
EigenResult inverse_power(const SparseMatrix& m, double shift, double tol = 1e-10, int max_iter = 10000);

/// min_i (m_ii - sum_{j != i} |m_ij|): a lower bound for the real part of
/// every eigenvalue of m.
double gershgorin_lower_bound(const SparseMatrix& m);

double norm_inf(std::span<const double> v);

}  // namespace apfold
