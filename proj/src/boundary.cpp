#include "solarinv/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "solarinv/errors.hpp"

namespace solarinv {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::NoIntersection: return "NoIntersection";
        case Regime::IntersectsBoundary: return "IntersectsBoundary";
        case Regime::IntersectsUpperBound: return "IntersectsUpperBound";
    }
    return "?";
}

std::string to_string(Region r) {
    switch (r) {
        case Region::W: return "W";
        case Region::I1: return "I1";
        case Region::I2: return "I2";
    }
    return "?";
}

double h_func(const FundamentalSolution& fs, double x) {
    const auto& p = fs.params();
    return fs.psi_deriv(1, x) * (p.c - r_tilde(p, x, p.y_bar)) + fs.psi(x) / (p.rho + p.kappa);
}

double h_func_normalized(const FundamentalSolution& fs, double x) {
    const auto& p = fs.params();
    const double r1 = fs.deriv_ratios(1, x)[1];
    return (p.c - r_tilde(p, x, p.y_bar)) + 1.0 / ((p.rho + p.kappa) * r1);
}

double solve_x_tilde(const FundamentalSolution& fs) {
    const auto& p = fs.params();
    const auto h = [&](double x) { return h_func_normalized(fs, x); };

    double half = 5.0 * p.sigma / std::sqrt(2.0 * p.kappa);
    double lo = p.mu - half, hi = p.mu + half;
    double h_lo = h(lo), h_hi = h(hi);
    int expansions = 0;
    while (h_lo * h_hi > 0.0) {
        if (++expansions > 50) {
            throw SolverError("no sign change of H in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              "]: H(lo)=" + std::to_string(h_lo) + ", H(hi)=" + std::to_string(h_hi));
        }
        half *= 2.0;
        lo = p.mu - half;
        hi = p.mu + half;
        h_lo = h(lo);
        h_hi = h(hi);
    }
    if (h_lo == 0.0) return lo;
    if (h_hi == 0.0) return hi;

    std::uintmax_t max_iter = 200;
    const auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, h_lo, h_hi, tol, max_iter);
    if (max_iter >= 200) throw SolverError("toms748 did not converge for x_tilde");
    return std::abs(h(a)) <= std::abs(h(b)) ? a : b;
}

OdeTerms ode_terms_scaled(const FundamentalSolution& fs, double y, double z) {
    const auto& p = fs.params();
    const auto r = fs.deriv_ratios(3, z);
    const double q0 = r[2] - r[1] * r[1];
    const double q1 = r[1] * r[3] - r[2] * r[2];
    const double q0_prime = r[3] - r[1] * r[2];
    const double cr = (p.rho + p.kappa) * (p.c - r_tilde(p, z, y));
    const double n = q0 * ((p.rho + 2.0 * p.kappa) / p.rho * r[1] + cr * r[2] + r[1]);
    const double d = cr * q1 + q0_prime;
    return {n, d};
}

OdeTerms ode_terms(const FundamentalSolution& fs, double y, double z) {
    const auto s = ode_terms_scaled(fs, y, z);
    const double cube = std::exp(3.0 * fs.log_psi(z));
    return {s.n * cube, s.d * cube};
}

double ode_rhs(const FundamentalSolution& fs, double y, double z) {
    const auto t = ode_terms_scaled(fs, y, z);
    if (std::abs(t.d) < 1e-12 * std::abs(t.n)) {
        throw SingularityError(y, z, "boundary ODE denominator vanished at y=" + std::to_string(y) +
                                         ", z=" + std::to_string(z));
    }
    return fs.params().beta * t.n / t.d;
}

// ---------------------------------------------------------------------------

FreeBoundary::FreeBoundary(ModelParams params, std::vector<double> y, std::vector<double> f_tilde,
                           std::vector<double> f_tilde_slope)
    : params_(params), y_(std::move(y)), f_tilde_(std::move(f_tilde)), f_tilde_slope_(std::move(f_tilde_slope)) {
    const std::size_t n = y_.size();
    if (n < 2 || f_tilde_.size() != n || f_tilde_slope_.size() != n) {
        throw DomainError("FreeBoundary needs matching grids with at least two nodes");
    }
    std::vector<double> f(n), fp(n), inv_slope(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = f_tilde_[i] - params_.beta * y_[i];
        fp[i] = f_tilde_slope_[i] - params_.beta;
        if (!(fp[i] > 0.0)) throw IntegrationError(y_[i], "free boundary is not strictly increasing");
        inv_slope[i] = 1.0 / fp[i];
    }
    f_ = MonotoneCubic(y_, f, fp);
    f_inv_ = MonotoneCubic(f, y_, inv_slope);
}

double FreeBoundary::f(double y) const { return f_(y); }

double FreeBoundary::f_tilde(double y) const { return f_(y) + params_.beta * y; }

double FreeBoundary::f_prime(double y) const { return f_.derivative(y); }

double FreeBoundary::f_inverse(double x) const {
    const double lo = x0(), hi = x_bar();
    const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
    if (!(x >= lo - slack && x <= hi + slack)) {
        throw DomainError("F^-1 queried at x=" + std::to_string(x) + " outside [x0, x_bar]");
    }
    return std::clamp(f_inv_(std::clamp(x, lo, hi)), 0.0, y_bar());
}

double FreeBoundary::f_bar_inverse(double x) const {
    if (x < x0()) return 0.0;
    if (x > x_bar()) return y_bar();
    return f_inverse(x);
}

double FreeBoundary::lipschitz_bound() const {
    double m = 0.0;
    for (double s : f_tilde_slope_) m = std::max(m, 1.0 / (s - params_.beta));
    return m;
}

void FreeBoundary::write_csv(std::ostream& out) const {
    out << "y,F_tilde,F\n";
    char buf[128];
    for (std::size_t i = 0; i < y_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", y_[i], f_tilde_[i], f_tilde_[i] - params_.beta * y_[i]);
        out << buf;
    }
}

// ---------------------------------------------------------------------------

namespace {

double checked_rhs(const FundamentalSolution& fs, double y, double z) {
    const auto t = ode_terms_scaled(fs, y, z);
    if (std::abs(t.d) < 1e-12 * std::abs(t.n)) {
        throw SingularityError(y, z, "boundary ODE denominator vanished at y=" + std::to_string(y));
    }
    if (!(t.d > 0.0)) {
        throw IntegrationError(y, "D(y, F~(y)) <= 0 at y=" + std::to_string(y) + ", z=" + std::to_string(z));
    }
    return fs.params().beta * t.n / t.d;
}

}  // namespace

FreeBoundary integrate_boundary(const FundamentalSolution& fs, double x_tilde, int n_steps) {
    if (n_steps < 100) throw DomainError("integrate_boundary needs n_steps >= 100");
    const auto& p = fs.params();
    const double h = p.y_bar / n_steps;
    const double slope_floor = p.beta * (1.0 - 1e-10);

    std::vector<double> y(n_steps + 1), z(n_steps + 1), slope(n_steps + 1);
    for (int j = 0; j <= n_steps; ++j) y[j] = p.y_bar * j / n_steps;

    z[n_steps] = x_tilde;
    for (int j = n_steps; j >= 0; --j) {
        const double yj = y[j];
        const double k1 = checked_rhs(fs, yj, z[j]);
        if (!(k1 >= slope_floor)) {
            throw IntegrationError(yj, "F~'(y) < beta at y=" + std::to_string(yj));
        }
        slope[j] = k1;
        if (j == 0) break;
        const double k2 = checked_rhs(fs, yj - 0.5 * h, z[j] - 0.5 * h * k1);
        const double k3 = checked_rhs(fs, yj - 0.5 * h, z[j] - 0.5 * h * k2);
        const double k4 = checked_rhs(fs, y[j - 1], z[j] - h * k3);
        z[j - 1] = z[j] - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    const double rk = p.rho + p.kappa;
    for (int j = 0; j <= n_steps; ++j) {
        const double f = z[j] - p.beta * y[j];
        if (!(f > p.c * p.rho + p.kappa * p.beta * y[j] / rk)) {
            throw IntegrationError(y[j], "F(y) <= c rho + kappa beta y/(rho+kappa) at y=" + std::to_string(y[j]));
        }
    }
    return FreeBoundary(p, std::move(y), std::move(z), std::move(slope));
}

FreeBoundary solve_boundary(const FundamentalSolution& fs, int n_steps) {
    return integrate_boundary(fs, solve_x_tilde(fs), n_steps);
}

double y_star(const FundamentalSolution& fs) {
    const auto& p = fs.params();
    const double r1 = fs.deriv_ratios(1, p.mu)[1];
    return ((p.mu - p.rho * p.c) * (p.rho + p.kappa) - p.rho / r1) / (p.beta * (p.rho + 2.0 * p.kappa));
}

RegimeReport classify_regime(const FundamentalSolution& fs, const FreeBoundary& fb) {
    const auto& p = fs.params();
    RegimeReport r{Regime::NoIntersection, false, y_star(fs), fb.x0(), fb.x_tilde()};
    if (r.f0 > p.mu) return r;
    r.tie = std::abs(p.y_bar - r.y_star) <= 1e-9 * std::max(1.0, p.y_bar);
    r.regime = (p.y_bar >= r.y_star || r.tie) ? Regime::IntersectsBoundary : Regime::IntersectsUpperBound;
    return r;
}

Region region_of(const FreeBoundary& fb, State s) {
    if (!(s.y >= 0.0 && s.y <= fb.y_bar())) {
        throw DomainError("state y=" + std::to_string(s.y) + " outside [0, y_bar]");
    }
    if (s.y == fb.y_bar()) return Region::W;
    if (s.x < fb.f(s.y)) return Region::W;
    if (s.x < fb.x_bar()) return Region::I1;
    return Region::I2;
}

}  // namespace solarinv
