#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace apfold {

/// A Lipschitz nonlinearity stored in normalized form: the user's lower slope
/// a has been subtracted (f <- f - a*id, b <- b - a), so every consumer sees
/// 0 <= (f(x) - f(y)) / (x - y) <= b. `a_offset` remembers the original a.
class Nonlinearity {
public:
    static Nonlinearity ramp(double b, double a = 0.0);
    static Nonlinearity smooth_ramp(double b, double a = 0.0);
    /// Piecewise-linear interpolation of (s, f(s)) samples, extrapolated with
    /// the end slopes. Breakpoints must be strictly increasing.
    static Nonlinearity table(std::vector<std::pair<double, double>> points, double b, double a = 0.0);
    /// f(s) = slope * s + intercept; used for degenerate/linear cases.
    static Nonlinearity affine(double slope, double intercept = 0.0);

    /// The zero function.
    Nonlinearity() = default;

    double operator()(double s) const { return value_(s); }
    /// Derivative where it exists; the midpoint of the one-sided slopes at kinks.
    double slope(double s) const { return slope_(s); }

    const std::string& kind() const noexcept { return kind_; }
    double b() const noexcept { return b_; }
    double a_offset() const noexcept { return a_offset_; }
    /// Constant of the lower bound f(s) >= max(b s - M, -M); +inf if none exists.
    double M() const noexcept { return M_; }
    double a_tilde() const noexcept { return a_tilde_; }
    double b_tilde() const noexcept { return b_tilde_; }
    bool convex() const noexcept { return convex_; }
    /// True iff f is C^1, so slope() is a true derivative everywhere.
    bool smooth() const noexcept { return smooth_; }
    double mollify_delta() const noexcept { return mollify_delta_; }

private:
    friend Nonlinearity mollify(const Nonlinearity& f, double delta);

    std::function<double(double)> value_ = [](double) { return 0.0; };
    std::function<double(double)> slope_ = [](double) { return 0.0; };
    std::string kind_ = "affine";
    double b_ = 0.0;
    double a_offset_ = 0.0;
    double M_ = 0.0;
    double a_tilde_ = 0.0;
    double b_tilde_ = 0.0;
    bool convex_ = true;
    bool smooth_ = false;
    double mollify_delta_ = 0.0;
};

struct NonlinearityParams {
    double a = 0.0;
    double b = 0.0;
    std::vector<std::pair<double, double>> table;  // kind "table"
    double slope = 0.0;                            // kind "affine"
    double intercept = 0.0;                        // kind "affine"
};

/// Dispatches on "ramp", "smooth_ramp", "table" or "affine". Throws
/// PreconditionError for an unknown kind or b <= a on the ramp presets.
Nonlinearity make_preset(const std::string& kind, const NonlinearityParams& params);

/// f_delta(x) = int f(x - s) psi_delta(s) ds with the compact exponential bump,
/// evaluated by 32-point Gauss-Legendre on [-delta, delta] and normalized so
/// the discrete weights sum to one.
Nonlinearity mollify(const Nonlinearity& f, double delta);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

struct ValidationSampling {
    double s_max = 50.0;
    int grid_points = 2001;
    int random_pairs = 10000;
    std::uint64_t seed = 0;
    /// One-sided neighbourhood of 0 probed for the excluded affine form.
    double degeneracy_radius = 1e-3;
    int degeneracy_points = 16;
};

struct APReport {
    double slope_min = 0.0;
    double slope_max = 0.0;
    bool slopes_ok = false;       // sampled quotients in [0, b]
    bool lower_bound_ok = false;  // f(s) >= max(b s - M, -M)
    bool convex_ok = false;       // midpoint convexity on sampled pairs
    bool lambda_positive = false; // a < lambda1 after normalization
    bool lambda_below_b = false;  // lambda1 < b
    bool b_below_B = false;       // b < B_available (warning only)
    bool degenerate_left = false;
    bool degenerate_right = false;
    double resolution = 0.0;
    std::vector<std::string> messages;

    bool passed() const {
        return slopes_ok && lower_bound_ok && convex_ok && lambda_positive && lambda_below_b && !degenerate_left &&
               !degenerate_right;
    }
};

/// Sampling-based check of the slope, lower-bound and convexity hypotheses,
/// of 0 < lambda1 < b, of b < B_available, and of the excluded form
/// f(s) = lambda1 s + f(0) on a one-sided neighbourhood of 0. All inputs are
/// in normalized form. Reports only; never throws.
APReport validate_AP(const Nonlinearity& f, double lambda1, double B_available, const ValidationSampling& opts = {});

}  // namespace apfold
