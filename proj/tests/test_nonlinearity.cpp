#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "apfold/error.hpp"
#include "apfold/nonlinearity.hpp"

using namespace apfold;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

std::vector<Nonlinearity> presets() {
    return {
        Nonlinearity::ramp(12.0),
        Nonlinearity::smooth_ramp(12.0),
        Nonlinearity::ramp(30.0, -2.0),
        Nonlinearity::table({{-1.0, -0.5}, {0.0, 0.0}, {1.0, 3.0}, {2.0, 10.0}}, 8.0),
        mollify(Nonlinearity::ramp(12.0), 0.1),
        Nonlinearity::affine(5.0, 1.0),
    };
}

}  // namespace

TEST_CASE("ramp values") {
    const auto f = Nonlinearity::ramp(12.0);
    CHECK(f(-1.0) == 0.0);
    CHECK(f(0.0) == 0.0);
    CHECK(f(1.0) == 12.0);
    CHECK(f.slope(0.0) == 6.0);
    CHECK(f.M() == 0.0);
    CHECK(f.a_tilde() == 0.0);
    CHECK(f.b_tilde() == 12.0);
    CHECK(f.convex());
    CHECK_FALSE(f.smooth());
    for (double s = -5.0; s <= 5.0; s += 0.25) CHECK(f(s) - 12.0 * s == doctest::Approx(12.0 * std::max(-s, 0.0)));
}

TEST_CASE("smooth ramp values and derivative") {
    const auto f = Nonlinearity::smooth_ramp(12.0);
    CHECK(f(0.0) == 0.0);
    for (double s = -20.0; s <= 20.0; s += 0.5) {
        const double d = 6.0 * (1.0 + s / std::sqrt(s * s + 1.0));
        CHECK(f.slope(s) == doctest::Approx(d));
        CHECK(f.slope(s) > 0.0);
        CHECK(f.slope(s) < 12.0);
        const double h = 1e-5;
        CHECK((f(s + h) - f(s - h)) / (2 * h) == doctest::Approx(d).epsilon(1e-6));
    }
    // far left tail approaches -b/2 from above without cancellation
    CHECK(f(-1e8) > -6.0);
    CHECK(f(-1e8) + 6.0 == doctest::Approx(6.0 / (2e8)).epsilon(1e-6));
}

TEST_CASE("normalization subtracts the lower slope") {
    const auto f = Nonlinearity::ramp(30.0, -2.0);
    CHECK(f.b() == 32.0);
    CHECK(f.a_offset() == -2.0);
    CHECK(f(1.0) == 32.0);
    CHECK(f(-1.0) == 0.0);
    CHECK_THROWS_AS(Nonlinearity::ramp(1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(Nonlinearity::smooth_ramp(0.0, 2.0), PreconditionError);
}

TEST_CASE("table interpolates and extrapolates") {
    const auto f = Nonlinearity::table({{-1.0, -0.5}, {0.0, 0.0}, {1.0, 3.0}, {2.0, 10.0}}, 8.0);
    CHECK(f(0.5) == doctest::Approx(1.5));
    CHECK(f(3.0) == doctest::Approx(17.0));
    CHECK(f(-3.0) == doctest::Approx(-1.5));
    CHECK(f.a_tilde() == doctest::Approx(0.5));
    CHECK(f.b_tilde() == doctest::Approx(7.0));
    CHECK(f.convex());
    const auto bent = Nonlinearity::table({{0.0, 0.0}, {1.0, 5.0}, {2.0, 6.0}}, 8.0);
    CHECK_FALSE(bent.convex());
    CHECK_THROWS_AS(Nonlinearity::table({{1.0, 0.0}, {0.0, 1.0}}, 8.0), PreconditionError);
    CHECK_THROWS_AS(Nonlinearity::table({{1.0, 0.0}}, 8.0), PreconditionError);
}

TEST_CASE("make_preset dispatch") {
    NonlinearityParams p;
    p.b = 12.0;
    CHECK(make_preset("ramp", p).kind() == "ramp");
    CHECK(make_preset("smooth_ramp", p).kind() == "smooth_ramp");
    CHECK_THROWS_AS(make_preset("cubic", p), PreconditionError);
    p.b = -1.0;
    CHECK_THROWS_AS(make_preset("ramp", p), PreconditionError);
}

TEST_CASE("difference quotients of every preset lie in [0, b]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-30.0, 30.0);
    for (const auto& f : presets()) {
        const double tol = 1e-9 * std::max(1.0, f.b());
        for (int i = 0; i < 10000; ++i) {
            const double x = U(rng), y = U(rng);
            if (x == y) continue;
            const double q = (f(x) - f(y)) / (x - y);
            CHECK(q >= -tol);
            CHECK(q <= f.b() + tol);
        }
    }
}

TEST_CASE("asymptotic slopes agree with f(T)/T") {
    const double T = 1e6;
    for (const auto& f : presets()) {
        const double bound = (f.M() + std::abs(f(0.0))) / T + 1e-9;
        CHECK(std::abs(f(T) / T - f.b_tilde()) <= bound);
        CHECK(std::abs(f(-T) / (-T) - f.a_tilde()) <= bound);
    }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    const auto [x, w] = gauss_legendre(32);
    CHECK(x.size() == 32);
    for (int deg = 0; deg <= 63; ++deg) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], deg);
        const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("mollification leaves affine functions unchanged") {
    const auto f = Nonlinearity::affine(3.0, -0.5);
    const auto g = mollify(f, 0.2);
    for (double s = -3.0; s <= 3.0; s += 0.1) {
        CHECK(g(s) == doctest::Approx(f(s)).epsilon(1e-13));
        CHECK(g.slope(s) == doctest::Approx(3.0).epsilon(1e-13));
    }
    CHECK(g.smooth());
    CHECK(g.mollify_delta() == 0.2);
    CHECK_THROWS_AS(mollify(f, 0.0), PreconditionError);
}

TEST_CASE("mollified ramp") {
    const auto f = Nonlinearity::ramp(12.0);
    const double delta = 0.1;
    const auto g = mollify(f, delta);
    for (double s : {-1.0, -0.5, -0.1, 0.1, 0.2, 1.0, 5.0}) CHECK(g(s) == doctest::Approx(f(s)).epsilon(1e-13).scale(1.0));
    CHECK(std::abs(g(0.0) - f(0.0)) <= 12.0 * delta);
    CHECK(g(0.0) > 0.0);

    // brute-force midpoint quadrature of the bump convolution at x = 0.03
    const auto bump = [](double x) { return std::abs(x) < 1.0 ? std::exp(1.0 / (x * x - 1.0)) : 0.0; };
    const int N = 200000;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < N; ++i) {
        const double s = -1.0 + (i + 0.5) * 2.0 / N;
        num += bump(s) * f(0.03 - delta * s);
        den += bump(s);
    }
    CHECK(g(0.03) == doctest::Approx(num / den).epsilon(1e-3));

    // slope bounds and convexity survive
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (int i = 0; i < 2000; ++i) {
        const double x = U(rng), y = U(rng);
        const double q = (g(x) - g(y)) / (x - y);
        CHECK(q >= -1e-9);
        CHECK(q <= 12.0 + 1e-9);
        CHECK(g(0.5 * (x + y)) <= 0.5 * (g(x) + g(y)) + 1e-9);
    }
    CHECK(g.slope(0.0) == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("validation of the hypotheses") {
    const auto ok = validate_AP(Nonlinearity::ramp(12.0), pi2, 4 * pi2);
    CHECK(ok.passed());
    CHECK(ok.b_below_B);
    CHECK(ok.slope_min >= 0.0);
    CHECK(ok.slope_max <= 12.0 + 1e-9);

    const auto low = validate_AP(Nonlinearity::ramp(8.0), pi2, 4 * pi2);
    CHECK_FALSE(low.passed());
    CHECK_FALSE(low.lambda_below_b);
    CHECK_FALSE(low.messages.empty());

    const auto neg = validate_AP(Nonlinearity::ramp(12.0), -1.0, 4 * pi2);
    CHECK_FALSE(neg.lambda_positive);

    const auto big_b = validate_AP(Nonlinearity::ramp(50.0), pi2, 4 * pi2);
    CHECK(big_b.passed());
    CHECK_FALSE(big_b.b_below_B);

    const auto bent = validate_AP(Nonlinearity::table({{0.0, 0.0}, {1.0, 5.0}, {2.0, 6.0}}, 8.0), pi2, 4 * pi2);
    CHECK_FALSE(bent.convex_ok);
    CHECK_FALSE(bent.passed());
}

TEST_CASE("the excluded affine form near zero is flagged") {
    // f(s) = lambda1 s on (0, 1), flat to the left and steeper to the right
    const auto f = Nonlinearity::table({{-1.0, 0.0}, {0.0, 0.0}, {1.0, pi2}, {2.0, pi2 + 12.0}}, 12.0);
    const auto r = validate_AP(f, pi2, 4 * pi2);
    CHECK(r.degenerate_right);
    CHECK_FALSE(r.degenerate_left);
    CHECK_FALSE(r.passed());
    CHECK_FALSE(validate_AP(Nonlinearity::ramp(12.0), pi2, 4 * pi2).degenerate_right);
}
