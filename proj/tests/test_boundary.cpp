#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "solarinv/boundary.hpp"
#include "solarinv/errors.hpp"

using namespace solarinv;

namespace {

ModelParams with_mu(double mu) {
    ModelParams p = table_preset();
    p.mu = mu;
    return validate(p);
}

/// Plain bisection on the raw H, kept deliberately separate from the production solver.
double bisect_h(const FundamentalSolution& fs, double lo, double hi) {
    double f_lo = h_func(fs, lo);
    REQUIRE(f_lo * h_func(fs, hi) < 0.0);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = h_func(fs, mid);
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double f0_with_steps(const FundamentalSolution& fs, double x_tilde, int n) {
    return integrate_boundary(fs, x_tilde, n).x0();
}

}  // namespace

TEST_CASE("anchor solves H = 0 and agrees with independent bisection") {
    for (double mu : {0.2, 1.4, 2.25}) {
        CAPTURE(mu);
        const ModelParams p = with_mu(mu);
        FundamentalSolution fs(p);
        const double xt = solve_x_tilde(fs);
        CHECK(std::abs(h_func(fs, xt)) < 1e-10 * fs.psi(xt));
        CHECK(std::abs(h_func_normalized(fs, xt)) < 1e-12);
        CHECK(std::abs(bisect_h(fs, p.mu - 5.0, p.mu + 5.0) - xt) < 1e-10);
    }
    // Regression baseline for the preset, recorded from the bisection oracle.
    FundamentalSolution fs(with_mu(0.2));
    CHECK(solve_x_tilde(fs) == doctest::Approx(3.768355513).epsilon(1e-9));
}

TEST_CASE("H changes sign exactly once") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double xt = solve_x_tilde(fs);
    const double left_sign = std::copysign(1.0, h_func(fs, xt - 4.0));
    for (int i = 0; i < 100; ++i) {
        const double x = xt - 4.0 + 8.0 * i / 99.0;
        if (std::abs(x - xt) < 1e-9) continue;
        const double s = std::copysign(1.0, h_func(fs, x));
        CHECK(s == (x < xt ? left_sign : -left_sign));
    }
}

TEST_CASE("anchor lies above the lower bound and increases with capacity") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double xt = solve_x_tilde(fs);
    CHECK(xt - p.beta * p.y_bar > p.c * p.rho + p.kappa * p.beta * p.y_bar / (p.rho + p.kappa));

    double prev = -1e300;
    for (double yb : {0.5, 1.0, 2.0, 5.0, 8.0}) {
        ModelParams q = p;
        q.y_bar = yb;
        const double x = solve_x_tilde(FundamentalSolution(q));
        CHECK(x > prev);
        prev = x;
    }
}

TEST_CASE("ODE right-hand side at the anchor") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double xt = solve_x_tilde(fs);
    CHECK(ode_rhs(fs, p.y_bar, xt) > p.beta);

    // D(y_bar, x~) = Q0 psi psi'' / psi' once H(x~) = 0.
    const auto t = ode_terms(fs, p.y_bar, xt);
    const double formula = fs.q_k(0, xt) * fs.psi(xt) * fs.psi_deriv(2, xt) / fs.psi_deriv(1, xt);
    CHECK(std::abs(t.d - formula) < 1e-9 * std::abs(formula));
}

TEST_CASE("D >= 0 implies N > D on a sample of the plane") {
    const ModelParams p = with_mu(1.4);
    FundamentalSolution fs(p);
    int checked = 0;
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double y = p.y_bar * i / 20.0;
            const double z = -1.0 + 5.0 * j / 20.0;
            const auto t = ode_terms_scaled(fs, y, z);
            if (t.d >= 0.0) {
                CHECK(t.n > t.d);
                ++checked;
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("vanishing denominator raises a singularity error") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double z = 1.0;
    const auto r = fs.deriv_ratios(3, z);
    const double q1 = r[1] * r[3] - r[2] * r[2];
    const double q0p = r[3] - r[1] * r[2];
    // Choose y so that (rho+kappa)(c - R~(z, y)) = -Q0'/Q1.
    const double target_r = p.c + q0p / (q1 * (p.rho + p.kappa));
    const double y = (p.mu * p.kappa + p.rho * z - target_r * p.rho * (p.rho + p.kappa)) / (p.beta * (p.rho + 2 * p.kappa));
    try {
        ode_rhs(fs, y, z);
        FAIL("no singularity detected");
    } catch (const SingularityError& e) {
        CHECK(e.y() == y);
        CHECK(e.z() == z);
    }
}

TEST_CASE("integration from a wrong anchor reports the failing level") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double xt = solve_x_tilde(fs);
    try {
        integrate_boundary(fs, xt + 1.0, 200);
        FAIL("integration accepted an anchor with D <= 0");
    } catch (const IntegrationError& e) {
        CHECK(e.y() == p.y_bar);
    }
    try {
        integrate_boundary(fs, xt - 3.0, 200);
        FAIL("integration accepted a boundary below the lower bound");
    } catch (const IntegrationError& e) {
        CHECK(e.y() >= 0.0);
        CHECK(e.y() <= p.y_bar);
    }
    CHECK_THROWS_AS(integrate_boundary(fs, xt, 99), DomainError);
}

TEST_CASE("boundary invariants hold on every grid node") {
    for (double mu : {0.2, 1.4, 2.25}) {
        CAPTURE(mu);
        const ModelParams p = with_mu(mu);
        FundamentalSolution fs(p);
        const FreeBoundary fb = solve_boundary(fs);
        CHECK(fb.f_tilde(p.y_bar) == fb.x_tilde());
        CHECK(fb.x_tilde() == solve_x_tilde(fs));
        const auto ys = fb.y_grid();
        const auto zs = fb.f_tilde_grid();
        for (std::size_t i = 0; i < ys.size(); ++i) {
            CHECK(fb.f_tilde_slopes()[i] >= p.beta);
            const double f = zs[i] - p.beta * ys[i];
            CHECK(f > p.c * p.rho + p.kappa * p.beta * ys[i] / (p.rho + p.kappa));
            CHECK(ode_terms_scaled(fs, ys[i], zs[i]).d > 0.0);
            if (i > 0) {
                CHECK(zs[i] - zs[i - 1] >= p.beta * (ys[i] - ys[i - 1]));
                CHECK(f > zs[i - 1] - p.beta * ys[i - 1]);
            }
        }
    }
}

TEST_CASE("step halving converges at fourth order") {
    const ModelParams p = with_mu(0.2);
    FundamentalSolution fs(p);
    const double xt = solve_x_tilde(fs);
    const double a = f0_with_steps(fs, xt, 100);
    const double b = f0_with_steps(fs, xt, 200);
    const double c = f0_with_steps(fs, xt, 400);
    CHECK(std::abs(b - c) < 1e-6);
    const double order = std::log2(std::abs(a - b) / std::abs(b - c));
    CAPTURE(order);
    CHECK(order >= 3.0);
    CHECK(std::abs(f0_with_steps(fs, xt, 2000) - f0_with_steps(fs, xt, 4000)) < 1e-9);
}

TEST_CASE("inverse and clamped inverse") {
    const ModelParams p = with_mu(1.4);
    FundamentalSolution fs(p);
    const FreeBoundary fb = solve_boundary(fs);
    for (double y : fb.y_grid()) CHECK(std::abs(fb.f_inverse(fb.f(y)) - y) < 1e-8);
    for (double y = 0.013; y < p.y_bar; y += 0.37) CHECK(std::abs(fb.f_inverse(fb.f(y)) - y) < 1e-8);

    CHECK(fb.f_bar_inverse(fb.x0() - 1.0) == 0.0);
    CHECK(fb.f_bar_inverse(fb.x_bar() + 1.0) == p.y_bar);
    CHECK_THROWS_AS(fb.f_inverse(fb.x0() - 0.01), DomainError);
    CHECK_THROWS_AS(fb.f_inverse(fb.x_bar() + 0.01), DomainError);
    CHECK_THROWS_AS(fb.f(-0.1), DomainError);

    // Lipschitz: difference quotients of the clamped inverse over a fine grid.
    double worst = 0.0;
    const double lo = fb.x0() - 0.5, hi = fb.x_bar() + 0.5;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x1 = lo + (hi - lo) * i / n, x2 = lo + (hi - lo) * (i + 1) / n;
        worst = std::max(worst, (fb.f_bar_inverse(x2) - fb.f_bar_inverse(x1)) / (x2 - x1));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst <= fb.lipschitz_bound() * (1.0 + 1e-3));
    CHECK(worst >= fb.lipschitz_bound() * (1.0 - 1e-2));
}

TEST_CASE("critical capacity") {
    const ModelParams p = with_mu(1.4);
    FundamentalSolution fs(p);
    // Plug-in with psi(mu) and psi'(mu) from the moment integrals.
    const double ps = fs.psi_moment(0, p.mu), dps = fs.psi_moment(1, p.mu);
    const double oracle =
        ((p.mu - p.rho * p.c) * (p.rho + p.kappa) - p.rho * ps / dps) / (p.beta * (p.rho + 2 * p.kappa));
    CHECK(y_star(fs) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(y_star(fs) == doctest::Approx(2.421283).epsilon(1e-6));

    ModelParams q = p;
    q.c = 0.5;
    CHECK(y_star(FundamentalSolution(q)) < y_star(fs));
}

TEST_CASE("at y_bar = y* the anchor sits on the mean") {
    ModelParams p = with_mu(1.4);
    p.y_bar = y_star(FundamentalSolution(p));
    FundamentalSolution fs(p);
    const FreeBoundary fb = solve_boundary(fs);
    CHECK(std::abs(fb.x_tilde() - p.mu) < 1e-8);
    CHECK(std::abs(fb.x_bar() - (p.mu - p.beta * p.y_bar)) < 1e-8);
    const auto r = classify_regime(fs, fb);
    CHECK(r.tie);
    CHECK(r.regime == Regime::IntersectsBoundary);
}

TEST_CASE("regimes of the three line-of-means geometries") {
    const std::pair<double, Regime> cases[] = {{0.2, Regime::NoIntersection},
                                               {1.4, Regime::IntersectsBoundary},
                                               {2.25, Regime::IntersectsUpperBound}};
    for (const auto& [mu, expected] : cases) {
        CAPTURE(mu);
        FundamentalSolution fs(with_mu(mu));
        const FreeBoundary fb = solve_boundary(fs);
        const auto r = classify_regime(fs, fb);
        CHECK(r.regime == expected);
        CHECK_FALSE(r.tie);
        CHECK((r.f0 > mu) == (expected == Regime::NoIntersection));
    }
}

TEST_CASE("region classification") {
    const ModelParams p = with_mu(1.4);
    FundamentalSolution fs(p);
    const FreeBoundary fb = solve_boundary(fs);
    for (double y : {0.0, 1.0, 3.3, 4.99}) {
        CHECK(region_of(fb, {fb.f(y) - 1e-9, y}) == Region::W);
        CHECK(region_of(fb, {fb.f(y), y}) == Region::I1);
        CHECK(region_of(fb, {fb.x_bar() + 1e-9, y}) == Region::I2);
        int prev = 0;
        for (double x = -1.0; x < 3.0; x += 0.01) {
            const int r = static_cast<int>(region_of(fb, {x, y}));
            CHECK(r >= prev);
            prev = r;
        }
    }
    CHECK(region_of(fb, {100.0, p.y_bar}) == Region::W);
    CHECK_THROWS_AS(region_of(fb, {0.0, -0.1}), DomainError);
    CHECK_THROWS_AS(region_of(fb, {0.0, p.y_bar + 0.1}), DomainError);
}

TEST_CASE("grid CSV export") {
    FundamentalSolution fs(with_mu(0.2));
    const FreeBoundary fb = solve_boundary(fs, 200);
    std::ostringstream out;
    fb.write_csv(out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "y,F_tilde,F");
    int rows = 0;
    std::string first;
    while (std::getline(in, line)) {
        if (rows == 0) first = line;
        ++rows;
    }
    CHECK(rows == 201);
    CHECK(first == "0,1.20858902551,1.20858902551");
}
