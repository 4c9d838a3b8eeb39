#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "solarinv/interpolation.hpp"
#include "solarinv/model.hpp"
#include "solarinv/special_functions.hpp"

namespace solarinv {

/// Position of the line of means x = mu - beta*y relative to the installation region.
enum class Regime { NoIntersection, IntersectsBoundary, IntersectsUpperBound };

/// W: wait (x < F(y)); I1: lump to the boundary; I2: lump to capacity (x >= x_bar).
enum class Region { W, I1, I2 };

std::string to_string(Regime r);
std::string to_string(Region r);

/// H(x) = psi'(x)(c - R~(x, y_bar)) + psi(x)/(rho+kappa). Its root anchors the boundary at y_bar.
double h_func(const FundamentalSolution& fs, double x);

/// H(x)/psi'(x): same sign and root as H, never overflows.
double h_func_normalized(const FundamentalSolution& fs, double x);

/// Unique root of H, bracketed by geometric expansion around mu.
/// Throws SolverError after 50 unsuccessful expansions.
double solve_x_tilde(const FundamentalSolution& fs);

/// Numerator and denominator of the boundary ODE right-hand side.
struct OdeTerms {
    double n;
    double d;
};

/// N and D divided by psi(z)^3 (same ratio, no overflow).
OdeTerms ode_terms_scaled(const FundamentalSolution& fs, double y, double z);
OdeTerms ode_terms(const FundamentalSolution& fs, double y, double z);

/// F~'(y) = beta * N(y, z) / D(y, z). Throws SingularityError when |D| < 1e-12 |N|.
double ode_rhs(const FundamentalSolution& fs, double y, double z);

/// Free boundary sampled on an ascending grid of [0, y_bar].
///
/// Stores F~(y) = F(y) + beta*y and its ODE slope at every node; F, F^-1 and
/// the clamped inverse are monotone cubic Hermite interpolants of those samples.
class FreeBoundary {
public:
    FreeBoundary() = default;
    FreeBoundary(ModelParams params, std::vector<double> y, std::vector<double> f_tilde,
                 std::vector<double> f_tilde_slope);

    const ModelParams& params() const noexcept { return params_; }
    std::span<const double> y_grid() const noexcept { return y_; }
    std::span<const double> f_tilde_grid() const noexcept { return f_tilde_; }
    std::span<const double> f_tilde_slopes() const noexcept { return f_tilde_slope_; }
    std::size_t size() const noexcept { return y_.size(); }

    double y_bar() const noexcept { return y_.back(); }
    double x_tilde() const noexcept { return f_tilde_.back(); }
    /// F(0): price at which installation starts from zero capacity.
    double x0() const noexcept { return f_tilde_.front(); }
    /// F(y_bar) = x_tilde - beta*y_bar.
    double x_bar() const noexcept { return f_tilde_.back() - params_.beta * y_.back(); }

    double f_tilde(double y) const;
    double f(double y) const;
    double f_prime(double y) const;
    /// Defined on [x0, x_bar]; throws DomainError elsewhere.
    double f_inverse(double x) const;
    /// 0 below x0, F^-1 on [x0, x_bar], y_bar above x_bar.
    double f_bar_inverse(double x) const;
    /// max over nodes of 1/(F~' - beta): Lipschitz constant of the clamped inverse.
    double lipschitz_bound() const;

    /// Header `y,F_tilde,F`, one row per node, 12 significant digits.
    void write_csv(std::ostream& out) const;

private:
    ModelParams params_;
    std::vector<double> y_, f_tilde_, f_tilde_slope_;
    MonotoneCubic f_, f_inv_;
};

/// Classical RK4 with n_steps fixed steps backward from (y_bar, x_tilde) to y = 0.
/// Every stage requires D > 0 and every node F~' >= beta; violations throw IntegrationError.
FreeBoundary integrate_boundary(const FundamentalSolution& fs, double x_tilde, int n_steps = 2000);

/// solve_x_tilde followed by integrate_boundary.
FreeBoundary solve_boundary(const FundamentalSolution& fs, int n_steps = 2000);

/// Critical capacity at which the line of means passes through (x_bar, y_bar):
/// y* = ((mu - rho c)(rho+kappa) - rho psi(mu)/psi'(mu)) / (beta (rho + 2 kappa)).
double y_star(const FundamentalSolution& fs);

struct RegimeReport {
    Regime regime;
    /// y_bar equals y* to within 1e-9 relative; reported as IntersectsBoundary.
    bool tie;
    double y_star;
    double f0;
    double x_tilde;
};

RegimeReport classify_regime(const FundamentalSolution& fs, const FreeBoundary& fb);

/// At y == y_bar no further installation is possible and every x maps to W.
Region region_of(const FreeBoundary& fb, State s);

}  // namespace solarinv
