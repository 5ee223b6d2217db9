#include "apfold/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "apfold/error.hpp"

namespace apfold {

std::string to_string(MaskPreset m) {
    switch (m) {
        case MaskPreset::rectangle: return "rectangle";
        case MaskPreset::disk: return "disk";
    }
    return "rectangle";
}

MaskPreset mask_from_string(const std::string& name) {
    if (name == "rectangle") return MaskPreset::rectangle;
    if (name == "disk") return MaskPreset::disk;
    throw PreconditionError("unknown mask preset '" + name + "'");
}

void Domain::validate() const {
    if (dim != 1 && dim != 2) throw PreconditionError("domain dimension must be 1 or 2");
    for (int d = 0; d < dim; ++d) {
        const auto& b = bounds[static_cast<std::size_t>(d)];
        if (!(b.lo < b.hi)) throw PreconditionError("domain bounds must satisfy lo < hi on every axis");
    }
    if (dim == 1 && mask == MaskPreset::disk) throw PreconditionError("the disk mask needs a 2D domain");
}

bool Domain::contains(double x, double y) const {
    if (!(x > bounds[0].lo && x < bounds[0].hi)) return false;
    if (dim == 2 && !(y > bounds[1].lo && y < bounds[1].hi)) return false;
    if (mask == MaskPreset::disk) {
        const double cx = 0.5 * (bounds[0].lo + bounds[0].hi);
        const double cy = 0.5 * (bounds[1].lo + bounds[1].hi);
        const double r = 0.5 * std::min(bounds[0].length(), bounds[1].length());
        return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r;
    }
    return true;
}

Grid::Grid(Domain domain, std::array<int, 2> n) : domain_(domain), n_(n) {
    domain_.validate();
    if (domain_.dim == 1) n_[1] = 1;
    for (int d = 0; d < domain_.dim; ++d) {
        if (n_[static_cast<std::size_t>(d)] < 3) throw PreconditionError("grid needs at least 3 points per axis");
    }
    cell_volume_ = 1.0;
    for (int d = 0; d < 2; ++d) {
        const auto ud = static_cast<std::size_t>(d);
        if (d < domain_.dim) {
            h_[ud] = domain_.bounds[ud].length() / static_cast<double>(n_[ud] - 1);
            cell_volume_ *= h_[ud];
        } else {
            h_[ud] = 0.0;
        }
    }

    lattice_to_interior_.assign(static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]), -1);
    const int jlo = domain_.dim == 2 ? 1 : 0;
    const int jhi = domain_.dim == 2 ? n_[1] - 1 : 1;
    for (int j = jlo; j < jhi; ++j) {
        for (int i = 1; i < n_[0] - 1; ++i) {
            const double x = domain_.bounds[0].lo + i * h_[0];
            const double y = domain_.dim == 2 ? domain_.bounds[1].lo + j * h_[1] : 0.0;
            if (!domain_.contains(x, y)) continue;
            lattice_to_interior_[flat(i, j)] = static_cast<long>(interior_.size());
            interior_.push_back({i, j});
        }
    }
    if (interior_.empty()) throw PreconditionError("grid has no interior nodes");

    std::vector<bool> all(interior_.size(), true);
    if (!connected(all)) throw PreconditionError("masked region is not connected on the grid");

    distance_.resize(interior_.size());
    if (domain_.mask == MaskPreset::rectangle) {
        for (std::size_t k = 0; k < interior_.size(); ++k) {
            const auto x = coords(k);
            double d = std::numeric_limits<double>::infinity();
            for (int a = 0; a < domain_.dim; ++a) {
                const auto& b = domain_.bounds[static_cast<std::size_t>(a)];
                d = std::min({d, x[static_cast<std::size_t>(a)] - b.lo, b.hi - x[static_cast<std::size_t>(a)]});
            }
            distance_[k] = d;
        }
    } else {
        std::vector<std::array<double, 2>> outside;
        for (int j = 0; j < n_[1]; ++j) {
            for (int i = 0; i < n_[0]; ++i) {
                if (lattice_to_interior_[flat(i, j)] >= 0) continue;
                outside.push_back({domain_.bounds[0].lo + i * h_[0], domain_.bounds[1].lo + j * h_[1]});
            }
        }
        for (std::size_t k = 0; k < interior_.size(); ++k) {
            const auto x = coords(k);
            double d2 = std::numeric_limits<double>::infinity();
            for (const auto& o : outside) {
                d2 = std::min(d2, (x[0] - o[0]) * (x[0] - o[0]) + (x[1] - o[1]) * (x[1] - o[1]));
            }
            distance_[k] = std::sqrt(d2);
        }
    }
}

std::array<double, 2> Grid::coords(std::size_t k) const {
    const auto& ij = interior_[k];
    return {domain_.bounds[0].lo + ij[0] * h_[0],
            domain_.dim == 2 ? domain_.bounds[1].lo + ij[1] * h_[1] : 0.0};
}

long Grid::index_of(int i, int j) const {
    if (i < 0 || i >= n_[0] || j < 0 || j >= n_[1]) return -1;
    return lattice_to_interior_[flat(i, j)];
}

long Grid::neighbor(std::size_t k, int di, int dj) const {
    const auto& ij = interior_[k];
    return index_of(ij[0] + di, ij[1] + dj);
}

bool Grid::connected(const std::vector<bool>& subset) const {
    // vector<bool> has no contiguous storage, so copy into a plain buffer
    std::unique_ptr<bool[]> buf(new bool[subset.size()]);
    std::copy(subset.begin(), subset.end(), buf.get());
    return connected(std::span<const bool>(buf.get(), subset.size()));
}

bool Grid::connected(std::span<const bool> subset) const {
    if (subset.size() != size()) throw DimensionError("subset size does not match the grid");
    std::size_t start = size();
    std::size_t members = 0;
    for (std::size_t k = 0; k < size(); ++k) {
        if (subset[k]) {
            if (start == size()) start = k;
            ++members;
        }
    }
    if (members == 0) return false;

    std::vector<bool> seen(size(), false);
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    std::size_t reached = 0;
    static constexpr std::array<std::array<int, 2>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!queue.empty()) {
        const auto k = queue.front();
        queue.pop_front();
        ++reached;
        for (const auto& s : steps) {
            const long nb = neighbor(k, s[0], s[1]);
            if (nb < 0) continue;
            const auto unb = static_cast<std::size_t>(nb);
            if (!subset[unb] || seen[unb]) continue;
            seen[unb] = true;
            queue.push_back(unb);
        }
    }
    return reached == members;
}

bool Grid::same_as(const Grid& other) const {
    if (this == &other) return true;
    if (domain_.dim != other.domain_.dim || domain_.mask != other.domain_.mask || n_ != other.n_) return false;
    for (int d = 0; d < domain_.dim; ++d) {
        const auto ud = static_cast<std::size_t>(d);
        if (domain_.bounds[ud].lo != other.domain_.bounds[ud].lo || domain_.bounds[ud].hi != other.domain_.bounds[ud].hi)
            return false;
    }
    return true;
}

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)), values_(grid_ ? grid_->size() : 0, 0.0) {}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_ || values_.size() != grid_->size())
        throw DimensionError("grid function length does not match the interior node count");
}

GridFunction::GridFunction(GridPtr grid, double constant)
    : grid_(std::move(grid)), values_(grid_ ? grid_->size() : 0, constant) {}

void require_same_grid(const GridFunction& u, const GridFunction& v, const char* where) {
    if (!u.grid() || !v.grid() || u.size() != v.size() || !u.grid()->same_as(*v.grid()))
        throw DimensionError(std::string(where) + ": grid functions live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_grid(*this, o, "operator+=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_grid(*this, o, "operator-=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

GridFunction& GridFunction::axpy(double s, const GridFunction& o) {
    require_same_grid(*this, o, "axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
    return *this;
}

double GridFunction::sup() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }
GridFunction operator*(GridFunction a, double s) { return a *= s; }

double inner_product(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v, "inner_product");
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s * u.grid()->cell_volume();
}

double default_exponent(const Grid& grid) { return std::max(2.0, static_cast<double>(grid.dim())); }

namespace {

double value_at(const GridFunction& u, std::size_t k, int di, int dj) {
    const long nb = u.grid()->neighbor(k, di, dj);
    return nb < 0 ? 0.0 : u[static_cast<std::size_t>(nb)];
}

}  // namespace

double discrete_norm(const GridFunction& u, NormKind kind) {
    if (!u.grid()) throw DimensionError("discrete_norm: function has no grid");
    if (kind.kind == NormKind::Kind::sup) return u.sup();
    if (!(kind.p >= 1.0)) throw PreconditionError("discrete_norm: exponent p must be >= 1");

    const Grid& g = *u.grid();
    const double p = kind.p;
    double acc = 0.0;
    if (kind.kind == NormKind::Kind::lp) {
        for (double v : u.values()) acc += std::pow(std::abs(v), p);
        return std::pow(acc * g.cell_volume(), 1.0 / p);
    }

    const double h1 = g.spacing(0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double c = u[k];
        const double e = value_at(u, k, 1, 0);
        const double w = value_at(u, k, -1, 0);
        const double ux = (e - w) / (2.0 * h1);
        const double uxx = (e - 2.0 * c + w) / (h1 * h1);
        double grad2 = ux * ux;
        double hess2 = uxx * uxx;
        if (g.dim() == 2) {
            const double h2 = g.spacing(1);
            const double n = value_at(u, k, 0, 1);
            const double s = value_at(u, k, 0, -1);
            const double uy = (n - s) / (2.0 * h2);
            const double uyy = (n - 2.0 * c + s) / (h2 * h2);
            const double uxy = (value_at(u, k, 1, 1) - value_at(u, k, 1, -1) - value_at(u, k, -1, 1) +
                                value_at(u, k, -1, -1)) /
                               (4.0 * h1 * h2);
            grad2 += uy * uy;
            hess2 += uyy * uyy + 2.0 * uxy * uxy;
        }
        acc += std::pow(std::abs(c), p) + std::pow(std::sqrt(grad2), p) + std::pow(std::sqrt(hess2), p);
    }
    return std::pow(acc * g.cell_volume(), 1.0 / p);
}

}  // namespace apfold
