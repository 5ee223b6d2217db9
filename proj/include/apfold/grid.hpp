#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace apfold {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
};

enum class MaskPreset { rectangle, disk };

std::string to_string(MaskPreset m);
MaskPreset mask_from_string(const std::string& name);

/// Axis-aligned rectangle (1D interval or 2D box), optionally cut down by a
/// named mask. The masked region is sampled on the grid and must be
/// connected there.
struct Domain {
    int dim = 1;
    std::array<Interval, 2> bounds{};
    MaskPreset mask = MaskPreset::rectangle;

    void validate() const;
    /// True iff the point lies strictly inside the (masked) region.
    bool contains(double x, double y) const;
};

/// Uniform tensor grid over a Domain. `n[d]` counts all nodes on axis d,
/// boundary nodes included, so h[d] = length / (n[d] - 1). Only interior
/// nodes carry unknowns; every other node holds the Dirichlet value 0.
class Grid {
public:
    Grid(Domain domain, std::array<int, 2> n);

    const Domain& domain() const noexcept { return domain_; }
    int dim() const noexcept { return domain_.dim; }
    int points(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
    /// Volume of one cell, h_1 * ... * h_dim.
    double cell_volume() const noexcept { return cell_volume_; }

    std::size_t size() const noexcept { return interior_.size(); }
    /// Lattice coordinates (i, j) of interior node k (j = 0 in 1D).
    std::array<int, 2> lattice(std::size_t k) const { return interior_[k]; }
    std::array<double, 2> coords(std::size_t k) const;
    /// Interior index of lattice node (i, j), or -1 if it is not interior.
    long index_of(int i, int j = 0) const;
    /// Interior index of the neighbour of k displaced by (di, dj), or -1.
    long neighbor(std::size_t k, int di, int dj = 0) const;

    /// d(x) = dist(x, boundary) at interior node k.
    double boundary_distance(std::size_t k) const { return distance_[k]; }
    std::span<const double> boundary_distances() const noexcept { return distance_; }

    /// Measure of the discrete region: interior node count times cell volume.
    double measure() const noexcept { return cell_volume_ * static_cast<double>(size()); }

    /// True iff the node subset (one flag per interior node) is connected
    /// under nearest-neighbour adjacency.
    bool connected(std::span<const bool> subset) const;
    bool connected(const std::vector<bool>& subset) const;

    bool same_as(const Grid& other) const;

private:
    std::size_t flat(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_[0]) + static_cast<std::size_t>(i);
    }

    Domain domain_;
    std::array<int, 2> n_{};
    std::array<double, 2> h_{};
    double cell_volume_ = 0.0;
    std::vector<std::array<int, 2>> interior_;
    std::vector<long> lattice_to_interior_;
    std::vector<double> distance_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Values at the interior nodes of a grid; boundary values are implicitly 0.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridPtr grid);
    GridFunction(GridPtr grid, std::vector<double> values);
    GridFunction(GridPtr grid, double constant);

    template <class Fn>
    static GridFunction sample(GridPtr grid, Fn&& fn) {
        GridFunction out(grid);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto x = grid->coords(k);
            out.values_[k] = fn(x[0], x[1]);
        }
        return out;
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& vec() const noexcept { return values_; }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);
    /// this += s * o
    GridFunction& axpy(double s, const GridFunction& o);

    double sup() const;
    double min() const;
    double max() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);
GridFunction operator*(GridFunction a, double s);

/// Throws DimensionError unless both functions live on the same grid.
void require_same_grid(const GridFunction& u, const GridFunction& v, const char* where);

/// Discrete L2 pairing: sum over interior nodes of u*v*cell_volume.
double inner_product(const GridFunction& u, const GridFunction& v);

struct NormKind {
    enum class Kind { sup, lp, w2p };
    Kind kind = Kind::sup;
    double p = 2.0;

    static NormKind sup() { return {Kind::sup, 0.0}; }
    static NormKind lp(double p) { return {Kind::lp, p}; }
    static NormKind w2p(double p) { return {Kind::w2p, p}; }
};

/// sup, discrete L^p, or discrete W^{2,p}. The W^{2,p} surrogate uses centred
/// first/second differences (mixed derivative included in 2D) with the
/// Dirichlet zeros supplying the off-grid neighbours.
double discrete_norm(const GridFunction& u, NormKind kind);

/// p = max(dim, 2), the default Sobolev exponent.
double default_exponent(const Grid& grid);

}  // namespace apfold
