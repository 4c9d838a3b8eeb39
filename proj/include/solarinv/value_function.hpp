#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "solarinv/boundary.hpp"
#include "solarinv/model.hpp"
#include "solarinv/special_functions.hpp"

namespace solarinv {

struct WPartials {
    double w_x;
    double w_xx;
    double w_y;
};

struct HjbResidual {
    /// (1/2)sigma^2 w_xx + kappa(mu - beta y - x) w_x - rho w + x y
    double pde;
    /// w_y - c
    double gradient;
};

/// Candidate value function built on a solved free boundary.
///
/// In the waiting region w = A(y) psi(x + beta y) + R(x, y). A(y) is evaluated in
/// closed form at the interpolated boundary point F~(y); the psi factor is
/// carried as the ratio psi(x + beta y)/psi(F~(y)) so w never overflows.
class ValueFunction {
public:
    ValueFunction(FundamentalSolution fs, FreeBoundary fb);

    const ModelParams& params() const noexcept { return fs_.params(); }
    const FundamentalSolution& fundamental() const noexcept { return fs_; }
    const FreeBoundary& boundary() const noexcept { return fb_; }

    double a_of_y(double y) const;
    /// Same coefficient through H and Q0; an independent algebraic route.
    double a_of_y_alt(double y) const;
    double a_prime(double y) const;
    /// A' rebuilt from A through the smooth-fit relation in the x derivative.
    double a_prime_h(double y) const;

    /// D~(y, F~(y)) three ways: from psi''' and A', from the boundary level
    /// and A, and as D / ((rho+kappa) psi Q0).
    double d_tilde_from_a(double y) const;
    double d_tilde_from_level(double y) const;
    double d_tilde_from_nd(double y) const;

    double w_value(State s) const;
    WPartials w_partials(State s) const;

    /// Branch formulas without the region test; used for one-sided limits.
    /// The I1 branch needs x in [x0, x_bar].
    double w_branch(Region r, State s) const;
    WPartials w_partials_branch(Region r, State s) const;

    /// Requires y < y_bar.
    HjbResidual hjb_residual(State s) const;

    /// Z(x) = c rho + kappa beta w_x(x, F^-1(x)) - x on [x0, x_bar].
    double z_function(double x) const;
    /// S(x, y) = w_y(x, y) - c.
    double s_function(State s) const;

    /// max |w(x, y)| / (1 + |x|) over n_x points of [x_lo, x_hi] and every
    /// y_stride-th boundary node.
    double growth_check(double x_lo, double x_hi, int n_x = 201, int y_stride = 100) const;

    /// {params, x_tilde, x0, x_bar, y_star, grid: [{y, F, A}]}
    nlohmann::json to_json() const;

private:
    struct BoundaryPoint {
        double z;          // F~(y)
        std::vector<double> r;  // psi^(k)(z)/psi(z), k = 0..3
        double log_psi;
    };
    BoundaryPoint at(double y) const;
    /// A(y) * psi(F~(y)): A with psi(F~) divided out.
    double a_scaled(const BoundaryPoint& b, double y) const;
    double a_prime_scaled(const BoundaryPoint& b, double y) const;
    void check_state(State s) const;

    FundamentalSolution fs_;
    FreeBoundary fb_;
};

/// HJB residuals on the tensor grid xs x ys (row-major in y). Both give
/// identical results; the parallel one splits the rows across OpenMP threads.
std::vector<HjbResidual> hjb_grid_serial(const ValueFunction& vf, std::span<const double> xs,
                                         std::span<const double> ys);
std::vector<HjbResidual> hjb_grid(const ValueFunction& vf, std::span<const double> xs,
                                  std::span<const double> ys);

}  // namespace solarinv
