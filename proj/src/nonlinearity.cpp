#include "apfold/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "apfold/error.hpp"

namespace apfold {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// s + sqrt(s^2 + 1) without cancellation for large negative s.
double soft_plus_twice(double s) {
    const double r = std::hypot(s, 1.0);
    return s >= 0.0 ? s + r : 1.0 / (r - s);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Nonlinearity Nonlinearity::ramp(double b, double a) {
    if (!(b > a)) throw PreconditionError("ramp: need b > a");
    const double slope = b - a;
    Nonlinearity f;
    f.kind_ = "ramp";
    f.value_ = [slope](double s) { return s > 0.0 ? slope * s : 0.0; };
    f.slope_ = [slope](double s) { return s > 0.0 ? slope : (s < 0.0 ? 0.0 : 0.5 * slope); };
    f.b_ = slope;
    f.a_offset_ = a;
    f.M_ = 0.0;
    f.a_tilde_ = 0.0;
    f.b_tilde_ = slope;
    f.convex_ = true;
    f.smooth_ = false;
    return f;
}

Nonlinearity Nonlinearity::smooth_ramp(double b, double a) {
    if (!(b > a)) throw PreconditionError("smooth_ramp: need b > a");
    const double slope = b - a;
    Nonlinearity f;
    f.kind_ = "smooth_ramp";
    f.value_ = [slope](double s) { return 0.5 * slope * (soft_plus_twice(s) - 1.0); };
    f.slope_ = [slope](double s) { return 0.5 * slope * (1.0 + s / std::hypot(s, 1.0)); };
    f.b_ = slope;
    f.a_offset_ = a;
    f.M_ = 0.5 * slope;
    f.a_tilde_ = 0.0;
    f.b_tilde_ = slope;
    f.convex_ = true;
    f.smooth_ = true;
    return f;
}

Nonlinearity Nonlinearity::table(std::vector<std::pair<double, double>> points, double b, double a) {
    if (points.size() < 2) throw PreconditionError("table nonlinearity needs at least two samples");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].first > points[i - 1].first))
            throw PreconditionError("table nonlinearity: breakpoints must be strictly increasing");
    if (!(b > a)) throw PreconditionError("table: need b > a");

    auto s = std::make_shared<std::vector<double>>();
    auto v = std::make_shared<std::vector<double>>();
    auto m = std::make_shared<std::vector<double>>();  // segment slopes
    for (const auto& [x, y] : points) {
        s->push_back(x);
        v->push_back(y - a * x);
    }
    for (std::size_t i = 1; i < s->size(); ++i) m->push_back(((*v)[i] - (*v)[i - 1]) / ((*s)[i] - (*s)[i - 1]));

    Nonlinearity f;
    f.kind_ = "table";
    f.value_ = [s, v, m](double x) {
        const auto it = std::upper_bound(s->begin(), s->end(), x);
        std::size_t seg = it == s->begin() ? 0 : static_cast<std::size_t>(it - s->begin()) - 1;
        seg = std::min(seg, m->size() - 1);
        return (*v)[seg] + (*m)[seg] * (x - (*s)[seg]);
    };
    f.slope_ = [s, m](double x) {
        if (x <= s->front()) return x < s->front() ? m->front() : m->front();
        if (x >= s->back()) return m->back();
        const auto it = std::lower_bound(s->begin(), s->end(), x);
        const std::size_t i = static_cast<std::size_t>(it - s->begin());
        if (*it == x) return 0.5 * ((*m)[i - 1] + (*m)[i]);
        return (*m)[i - 1];
    };
    const double slope = b - a;
    f.b_ = slope;
    f.a_offset_ = a;
    f.a_tilde_ = m->front();
    f.b_tilde_ = m->back();
    f.convex_ = std::is_sorted(m->begin(), m->end());
    f.smooth_ = false;
    double M = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i) M = std::max({M, slope * (*s)[i] - (*v)[i], -(*v)[i]});
    if (m->back() < slope || m->front() > 0.0) M = kInf;
    f.M_ = M;
    return f;
}

Nonlinearity Nonlinearity::affine(double slope, double intercept) {
    Nonlinearity f;
    f.kind_ = "affine";
    f.value_ = [slope, intercept](double s) { return slope * s + intercept; };
    f.slope_ = [slope](double) { return slope; };
    f.b_ = std::max(slope, 0.0);
    f.a_offset_ = 0.0;
    f.M_ = std::max(0.0, -intercept);
    f.a_tilde_ = slope;
    f.b_tilde_ = slope;
    f.convex_ = true;
    f.smooth_ = true;
    return f;
}

Nonlinearity make_preset(const std::string& kind, const NonlinearityParams& p) {
    if (kind == "ramp") return Nonlinearity::ramp(p.b, p.a);
    if (kind == "smooth_ramp") return Nonlinearity::smooth_ramp(p.b, p.a);
    if (kind == "table") return Nonlinearity::table(p.table, p.b, p.a);
    if (kind == "affine") return Nonlinearity::affine(p.slope, p.intercept);
    throw PreconditionError("unknown nonlinearity kind '" + kind + "'");
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = -z;
        x[hi] = z;
        w[lo] = w[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

Nonlinearity mollify(const Nonlinearity& f, double delta) {
    if (!(delta > 0.0)) throw PreconditionError("mollify: delta must be positive");
    const auto [nodes, gw] = gauss_legendre(32);
    auto offsets = std::make_shared<std::vector<double>>();
    auto weights = std::make_shared<std::vector<double>>();
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double s = nodes[i];
        const double bump = std::exp(1.0 / (s * s - 1.0));
        offsets->push_back(delta * s);
        weights->push_back(gw[i] * bump);
        total += gw[i] * bump;
    }
    for (auto& w : *weights) w /= total;

    Nonlinearity g = f;
    const auto base_value = f.value_;
    const auto base_slope = f.slope_;
    g.value_ = [base_value, offsets, weights](double x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < offsets->size(); ++i) acc += (*weights)[i] * base_value(x - (*offsets)[i]);
        return acc;
    };
    g.slope_ = [base_slope, offsets, weights](double x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < offsets->size(); ++i) acc += (*weights)[i] * base_slope(x - (*offsets)[i]);
        return acc;
    };
    g.smooth_ = true;
    g.mollify_delta_ = delta;
    return g;
}

APReport validate_AP(const Nonlinearity& f, double lambda1, double B_available, const ValidationSampling& opts) {
    APReport r;
    const double b = f.b();
    const double tol = 1e-9 * (1.0 + std::abs(b));

    std::vector<double> s(static_cast<std::size_t>(std::max(opts.grid_points, 2)));
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = -opts.s_max + 2.0 * opts.s_max * static_cast<double>(i) / static_cast<double>(s.size() - 1);
    r.resolution = s[1] - s[0];

    std::mt19937_64 rng(opts.seed);
    r.slope_min = kInf;
    r.slope_max = -kInf;
    const auto record = [&](double x, double y) {
        if (x == y) return;
        const double q = (f(x) - f(y)) / (x - y);
        r.slope_min = std::min(r.slope_min, q);
        r.slope_max = std::max(r.slope_max, q);
    };
    for (std::size_t i = 1; i < s.size(); ++i) record(s[i], s[i - 1]);
    bool convex = true;
    for (int k = 0; k < opts.random_pairs; ++k) {
        const double x = -opts.s_max + 2.0 * opts.s_max * unit_uniform(rng);
        const double y = -opts.s_max + 2.0 * opts.s_max * unit_uniform(rng);
        record(x, y);
        const double mid = f(0.5 * (x + y));
        const double chord = 0.5 * (f(x) + f(y));
        if (mid > chord + tol * (1.0 + std::abs(x) + std::abs(y))) convex = false;
    }
    r.slopes_ok = r.slope_min >= -tol && r.slope_max <= b + tol;
    if (!r.slopes_ok) {
        std::ostringstream msg;
        msg << "sampled difference quotients span [" << r.slope_min << ", " << r.slope_max << "], outside [0, " << b
            << "]";
        r.messages.push_back(msg.str());
    }

    const double M = f.M();
    r.lower_bound_ok = std::isfinite(M);
    if (r.lower_bound_ok) {
        for (double x : s) {
            if (f(x) < std::max(b * x - M, -M) - tol * (1.0 + std::abs(x))) {
                r.lower_bound_ok = false;
                break;
            }
        }
    }
    if (!r.lower_bound_ok) r.messages.push_back("lower bound f(s) >= max(b s - M, -M) fails");

    r.convex_ok = convex;
    if (!convex) r.messages.push_back("midpoint convexity fails on a sampled pair");

    r.lambda_positive = lambda1 > 0.0;
    if (!r.lambda_positive) r.messages.push_back("principal eigenvalue does not exceed the lower slope a");
    r.lambda_below_b = lambda1 < b;
    if (!r.lambda_below_b) {
        std::ostringstream msg;
        msg << "lambda1 = " << lambda1 << " is not below b = " << b;
        r.messages.push_back(msg.str());
    }
    r.b_below_B = b < B_available;
    if (!r.b_below_B) {
        std::ostringstream msg;
        msg << "warning: b = " << b << " is not below the available threshold " << B_available;
        r.messages.push_back(msg.str());
    }

    const double f0 = f(0.0);
    const auto affine_on = [&](double sign) {
        for (int k = 1; k <= opts.degeneracy_points; ++k) {
            const double x = sign * opts.degeneracy_radius * k / opts.degeneracy_points;
            if (std::abs(f(x) - f0 - lambda1 * x) > 1e-9 * (1.0 + std::abs(f0) + std::abs(lambda1 * x))) return false;
        }
        return true;
    };
    r.degenerate_left = affine_on(-1.0);
    r.degenerate_right = affine_on(1.0);
    if (r.degenerate_left || r.degenerate_right) {
        std::ostringstream msg;
        msg << "f coincides with lambda1 s + f(0) on a " << (r.degenerate_right ? "right" : "left")
            << " neighbourhood of 0 (radius " << opts.degeneracy_radius << ")";
        r.messages.push_back(msg.str());
    }
    return r;
}

}  // namespace apfold
