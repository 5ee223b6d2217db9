#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "apfold/config.hpp"
#include "apfold/grid.hpp"
#include "apfold/linalg.hpp"
#include "apfold/operator.hpp"

namespace apfold::testing {

inline std::filesystem::path source_dir() { return APFOLD_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) { return source_dir() / "configs" / name; }

inline std::vector<std::filesystem::path> shipped_configs() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(source_dir() / "configs"))
        if (e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline GridPtr unit_interval(int n, double lo = 0.0, double hi = 1.0) {
    Domain d;
    d.dim = 1;
    d.bounds[0] = {lo, hi};
    return std::make_shared<const Grid>(d, std::array<int, 2>{n, 1});
}

inline GridPtr unit_square(int nx, int ny) {
    Domain d;
    d.dim = 2;
    d.bounds[0] = {0.0, 1.0};
    d.bounds[1] = {0.0, 1.0};
    return std::make_shared<const Grid>(d, std::array<int, 2>{nx, ny});
}

inline DiscreteOperator laplacian(const GridPtr& g, double drift = 0.0, double c = 0.0) {
    const double big = std::max({1.0, std::abs(drift), std::abs(c)});
    return assemble(g, CoefficientField::constant(*g, {1.0, 0.0, 1.0}, {drift, 0.0}, c, 1.0, big));
}

inline Eigen::MatrixXd dense(const SparseMatrix& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    const auto v = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ci[k])) += v[k];
    return out;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Real part of the eigenvalue of `m` with the smallest real part, by a dense
/// QR eigen decomposition.
inline double smallest_real_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, es.eigenvalues()[i].real());
    return best;
}

/// Config text for the 1D Laplacian on (0, 1) with the given nonlinearity block.
inline std::string line_config(int n, const std::string& nonlinearity, const std::string& extra = "") {
    return R"({"grid": {"dim": 1, "n": )" + std::to_string(n) + R"(}, "nonlinearity": )" + nonlinearity + extra + "}";
}

}  // namespace apfold::testing
