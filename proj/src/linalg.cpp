#include "apfold/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "apfold/error.hpp"

namespace apfold {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Deterministic right-hand side for the post-factorization residual probe.
std::vector<double> probe_vector(std::size_t n) {
    std::vector<double> r(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ULL;
    for (auto& v : r) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        v = static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------- SparseMatrix

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        const auto& tr = triplets[t];
        if (tr.row >= rows || tr.col >= cols) throw DimensionError("triplet index out of range");
        if (t > 0 && triplets[t - 1].row == tr.row && triplets[t - 1].col == tr.col) {
            m.values_.back() += tr.value;
            continue;
        }
        m.col_.push_back(tr.col);
        m.values_.push_back(tr.value);
        ++m.row_ptr_[tr.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
    if (row_major.size() != rows * cols) throw DimensionError("dense buffer has the wrong size");
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (row_major[r * cols + c] != 0.0) t.push_back({r, c, row_major[r * cols + c]});
    return from_triplets(rows, cols, std::move(t));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<double> ones(n, 1.0);
    return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return from_triplets(d.size(), d.size(), std::move(t));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<std::size_t>(it - col_.begin())];
}

std::vector<double> SparseMatrix::diagonal_entries() const {
    std::vector<double> d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw DimensionError("matrix-vector size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_[k]];
        y[r] = s;
    }
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(cols_, rows_);
    t.col_.resize(values_.size());
    t.values_.resize(values_.size());
    for (std::size_t k = 0; k < col_.size(); ++k) ++t.row_ptr_[col_[k] + 1];
    for (std::size_t r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
    std::vector<std::size_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const std::size_t dst = next[col_[k]]++;
            t.col_[dst] = r;
            t.values_[dst] = values_[k];
        }
    }
    return t;
}

SparseMatrix SparseMatrix::scaled(double s) const {
    SparseMatrix m = *this;
    for (auto& v : m.values_) v *= s;
    return m;
}

SparseMatrix SparseMatrix::plus_diagonal(std::span<const double> d) const {
    if (d.size() != rows_ || rows_ != cols_) throw DimensionError("plus_diagonal: size mismatch");
    SparseMatrix out = *this;
    bool complete = true;
    for (std::size_t r = 0; r < rows_ && complete; ++r) {
        const auto first = col_.begin() + static_cast<long>(row_ptr_[r]);
        const auto last = col_.begin() + static_cast<long>(row_ptr_[r + 1]);
        const auto it = std::lower_bound(first, last, r);
        if (it == last || *it != r) {
            complete = false;
            break;
        }
        out.values_[static_cast<std::size_t>(it - col_.begin())] += d[r];
    }
    if (complete) return out;
    // some diagonal entry is structurally absent: rebuild with the new pattern
    std::vector<Triplet> t;
    t.reserve(values_.size() + rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, col_[k], values_[k]});
        t.push_back({r, r, d[r]});
    }
    return from_triplets(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::restricted(const std::vector<bool>& keep) const {
    if (keep.size() != rows_ || rows_ != cols_) throw DimensionError("restricted: mask size mismatch");
    std::vector<long> map(rows_, -1);
    std::size_t m = 0;
    for (std::size_t i = 0; i < rows_; ++i)
        if (keep[i]) map[i] = static_cast<long>(m++);
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < rows_; ++r) {
        if (map[r] < 0) continue;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            if (map[col_[k]] < 0) continue;
            t.push_back({static_cast<std::size_t>(map[r]), static_cast<std::size_t>(map[col_[k]]), values_[k]});
        }
    }
    return from_triplets(m, m, std::move(t));
}

double SparseMatrix::norm_inf() const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
        m = std::max(m, s);
    }
    return m;
}

std::size_t SparseMatrix::lower_bandwidth() const {
    std::size_t b = 0;
    for (std::size_t r = 0; r < rows_; ++r)
        if (row_ptr_[r] < row_ptr_[r + 1] && col_[row_ptr_[r]] < r) b = std::max(b, r - col_[row_ptr_[r]]);
    return b;
}

std::size_t SparseMatrix::upper_bandwidth() const {
    std::size_t b = 0;
    for (std::size_t r = 0; r < rows_; ++r)
        if (row_ptr_[r] < row_ptr_[r + 1] && col_[row_ptr_[r + 1] - 1] > r)
            b = std::max(b, col_[row_ptr_[r + 1] - 1] - r);
    return b;
}

// ---------------------------------------------------------------- BandedLU

BandedLU BandedLU::factor(const SparseMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("factor: matrix must be square");
    BandedLU lu;
    const std::size_t n = lu.n_ = m.rows();
    lu.kl_ = m.lower_bandwidth();
    lu.ku_ = m.upper_bandwidth();
    const std::size_t kl = lu.kl_;
    const std::size_t reach = lu.kl_ + lu.ku_;
    lu.width_ = 2 * kl + lu.ku_ + 1;
    lu.band_.assign(n * lu.width_, 0.0);
    lu.pivot_.resize(n);

    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    const auto va = m.values();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) lu.at(r, ci[k]) = va[k];

    const double norm = m.norm_inf();
    const double tiny = static_cast<double>(std::max<std::size_t>(n, 1)) * kEps * (norm > 0.0 ? norm : 1.0);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t last_row = std::min(k + kl, n - 1);
        const std::size_t last_col = std::min(k + reach, n - 1);
        std::size_t p = k;
        double best = std::abs(lu.at(k, k));
        for (std::size_t i = k + 1; i <= last_row; ++i) {
            if (std::abs(lu.at(i, k)) > best) {
                best = std::abs(lu.at(i, k));
                p = i;
            }
        }
        if (best <= tiny) throw SingularityError("numerically singular pivot at index " + std::to_string(k), k);
        lu.pivot_[k] = p;
        if (p != k)
            for (std::size_t j = k; j <= last_col; ++j) std::swap(lu.at(k, j), lu.at(p, j));
        const double piv = lu.at(k, k);
        for (std::size_t i = k + 1; i <= last_row; ++i) {
            const double l = lu.at(i, k) / piv;
            lu.at(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j <= last_col; ++j) lu.at(i, j) -= l * lu.at(k, j);
        }
    }

    const auto r = probe_vector(n);
    const auto x = lu.solve(r);
    const auto mx = m.multiply(x);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(mx[i] - r[i]));
    lu.sampled_residual_ = diff / (norm * norm_inf(x) + norm_inf(r));
    if (!(lu.sampled_residual_ <= 1e-10))
        throw SingularityError("factorization failed its residual probe (ill-conditioned matrix)", n);
    return lu;
}

std::vector<double> BandedLU::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw DimensionError("solve: right-hand side has the wrong length");
    std::vector<double> y(rhs.begin(), rhs.end());
    const std::size_t reach = kl_ + ku_;
    for (std::size_t k = 0; k < n_; ++k) {
        std::swap(y[k], y[pivot_[k]]);
        const double yk = y[k];
        if (yk == 0.0) continue;
        const std::size_t last_row = std::min(k + kl_, n_ - 1);
        for (std::size_t i = k + 1; i <= last_row; ++i) y[i] -= at(i, k) * yk;
    }
    for (std::size_t kk = n_; kk-- > 0;) {
        double s = y[kk];
        const std::size_t last_col = std::min(kk + reach, n_ - 1);
        for (std::size_t j = kk + 1; j <= last_col; ++j) s -= at(kk, j) * y[j];
        y[kk] = s / at(kk, kk);
    }
    return y;
}

// ---------------------------------------------------------------- DenseLU

DenseLU DenseLU::factor(std::size_t n, std::vector<double> a) {
    if (a.size() != n * n) throw DimensionError("dense factor: buffer has the wrong size");
    DenseLU lu;
    lu.n_ = n;
    lu.pivot_.resize(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(a[i * n + j]);
        norm = std::max(norm, s);
    }
    const double tiny = static_cast<double>(std::max<std::size_t>(n, 1)) * kEps * (norm > 0.0 ? norm : 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
        if (std::abs(a[p * n + k]) <= tiny)
            throw SingularityError("numerically singular pivot at index " + std::to_string(k), k);
        lu.pivot_[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
        const double piv = a[k * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = a[i * n + k] / piv;
            a[i * n + k] = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
        }
    }
    lu.lu_ = std::move(a);
    return lu;
}

std::vector<double> DenseLU::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw DimensionError("solve: right-hand side has the wrong length");
    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n_; ++k) std::swap(y[k], y[pivot_[k]]);
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = k + 1; i < n_; ++i) y[i] -= lu_[i * n_ + k] * y[k];
    for (std::size_t k = n_; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < n_; ++j) s -= lu_[k * n_ + j] * y[j];
        y[k] = s / lu_[k * n_ + k];
    }
    return y;
}

// ---------------------------------------------------------------- BorderedSolver

namespace {
constexpr std::size_t kDenseFallbackLimit = 4000;
}

BorderedSolver::BorderedSolver(BorderedSystem sys) : sys_(std::move(sys)) {
    const std::size_t n = sys_.core.rows();
    if (sys_.core.cols() != n || sys_.border_col.size() != n || sys_.border_row.size() != n)
        throw DimensionError("bordered system: inconsistent sizes");
    try {
        auto lu = std::make_shared<const BandedLU>(BandedLU::factor(sys_.core));
        auto v = lu->solve(sys_.border_col);
        const double schur = dot(sys_.border_row, v);
        if (std::abs(schur) > 1e3 * kEps * norm_inf(sys_.border_row) * norm_inf(v) * static_cast<double>(n)) {
            core_ = std::move(lu);
            core_inv_p_ = std::move(v);
            schur_ = schur;
            return;
        }
    } catch (const SingularityError&) {
        // core singular on its own; the bordered matrix may still be regular
    }
    dense_ = build_dense();
}

std::shared_ptr<const DenseLU> BorderedSolver::build_dense() const {
    const std::size_t n = sys_.core.rows();
    if (n + 1 > kDenseFallbackLimit)
        throw SingularityError("bordered core is singular and the system is too large for the dense fallback", n);
    const std::size_t m = n + 1;
    std::vector<double> a(m * m, 0.0);
    const auto rp = sys_.core.row_ptr();
    const auto ci = sys_.core.col_index();
    const auto va = sys_.core.values();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) a[r * m + ci[k]] = va[k];
        a[r * m + n] = sys_.border_col[r];
        a[n * m + r] = sys_.border_row[r];
    }
    return std::make_shared<const DenseLU>(DenseLU::factor(m, std::move(a)));
}

std::pair<std::vector<double>, double> BorderedSolver::solve_block(std::span<const double> rhs,
                                                                   double scalar_rhs) const {
    auto y = core_->solve(rhs);
    const double s = (dot(sys_.border_row, y) - scalar_rhs) / schur_;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= s * core_inv_p_[i];
    return {std::move(y), s};
}

std::pair<std::vector<double>, double> BorderedSolver::solve_dense(const DenseLU& lu, std::span<const double> rhs,
                                                                   double scalar_rhs) const {
    std::vector<double> b(rhs.begin(), rhs.end());
    b.push_back(scalar_rhs);
    auto x = lu.solve(b);
    const double s = x.back();
    x.pop_back();
    return {std::move(x), s};
}

double BorderedSolver::residual(std::span<const double> rhs, double scalar_rhs, const std::vector<double>& x,
                                double s, std::vector<double>* r, double* r_scalar) const {
    auto mx = sys_.core.multiply(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        mx[i] = rhs[i] - mx[i] - s * sys_.border_col[i];
        worst = std::max(worst, std::abs(mx[i]));
    }
    const double rs = scalar_rhs - dot(sys_.border_row, x);
    worst = std::max(worst, std::abs(rs));
    if (r) *r = std::move(mx);
    if (r_scalar) *r_scalar = rs;
    return worst;
}

std::pair<std::vector<double>, double> BorderedSolver::solve(std::span<const double> rhs, double scalar_rhs) const {
    if (rhs.size() != sys_.core.rows()) throw DimensionError("bordered solve: right-hand side has the wrong length");
    if (dense_) return solve_dense(*dense_, rhs, scalar_rhs);

    auto [x, s] = solve_block(rhs, scalar_rhs);
    const double scale = (sys_.core.norm_inf() + norm_inf(sys_.border_col) + norm_inf(sys_.border_row)) *
                             (norm_inf(x) + std::abs(s)) +
                         norm_inf(rhs) + std::abs(scalar_rhs);
    std::vector<double> r;
    double rs = 0.0;
    double res = residual(rhs, scalar_rhs, x, s, &r, &rs);
    for (int step = 0; step < 2 && res > 8.0 * kEps * scale; ++step) {
        auto [dx, ds] = solve_block(r, rs);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
        s += ds;
        res = residual(rhs, scalar_rhs, x, s, &r, &rs);
    }
    if (res <= 1e-10 * scale) return {std::move(x), s};
    const auto lu = build_dense();
    return solve_dense(*lu, rhs, scalar_rhs);
}

std::pair<std::vector<double>, double> solve_bordered(const BorderedSystem& sys, std::span<const double> rhs,
                                                      double scalar_rhs) {
    return BorderedSolver(sys).solve(rhs, scalar_rhs);
}

// ---------------------------------------------------------------- eigen

double gershgorin_lower_bound(const SparseMatrix& m) {
    double lo = std::numeric_limits<double>::infinity();
    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    const auto va = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double diag = 0.0;
        double off = 0.0;
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
            if (ci[k] == r)
                diag += va[k];
            else
                off += std::abs(va[k]);
        }
        lo = std::min(lo, diag - off);
    }
    return lo;
}

EigenResult inverse_power(const SparseMatrix& m, double shift, double tol, int max_iter) {
    const std::size_t n = m.rows();
    if (n == 0 || m.cols() != n) throw DimensionError("inverse_power: matrix must be square and nonempty");
    std::vector<double> minus_shift(n, -shift);
    const auto lu = BandedLU::factor(m.plus_diagonal(minus_shift));
    // Below this the residual is dominated by rounding in the product m*v.
    const double floor = 16.0 * kEps * m.norm_inf();
    const double target = std::max(tol, floor);

    EigenResult out;
    out.vector.assign(n, 1.0);
    std::vector<double> mv(n);
    double res = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        auto y = lu.solve(out.vector);
        std::size_t idx = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(y[i]) > std::abs(y[idx])) idx = i;
        const double scale = y[idx];
        if (scale == 0.0 || !std::isfinite(scale)) throw IterationError("inverse_power: iterate collapsed", res);
        for (auto& v : y) v /= scale;
        out.vector = std::move(y);
        m.multiply(out.vector, mv);
        out.eigenvalue = dot(out.vector, mv) / dot(out.vector, out.vector);
        res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(mv[i] - out.eigenvalue * out.vector[i]));
        out.residual = res;
        out.iterations = it;
        if (res <= target) return out;
    }
    throw IterationError("inverse_power: no convergence within " + std::to_string(max_iter) + " iterations", res);
}

}  // namespace apfold
