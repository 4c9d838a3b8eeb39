#include "solarinv/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "solarinv/errors.hpp"

namespace solarinv {

ValueFunction::ValueFunction(FundamentalSolution fs, FreeBoundary fb) : fs_(std::move(fs)), fb_(std::move(fb)) {
    if (!(fs_.params() == fb_.params())) {
        throw DomainError("fundamental solution and free boundary were built from different parameters");
    }
}

ValueFunction::BoundaryPoint ValueFunction::at(double y) const {
    if (!(y >= 0.0 && y <= fb_.y_bar())) throw DomainError("y=" + std::to_string(y) + " outside [0, y_bar]");
    BoundaryPoint b;
    b.z = fb_.f_tilde(y);
    b.r = fs_.deriv_ratios(3, b.z);
    b.log_psi = fs_.log_psi(b.z);
    return b;
}

double ValueFunction::a_scaled(const BoundaryPoint& b, double y) const {
    const auto& p = params();
    const double rk = p.rho + p.kappa;
    const double f = b.z - p.beta * y;
    const double num = rk * (p.c * p.rho + p.kappa * p.beta * y / rk - f) * b.r[1] + 0.5 * p.sigma * p.sigma * b.r[2];
    const double den = b.r[1] * b.r[1] - b.r[2];
    return num / den / (p.beta * p.rho * rk);
}

double ValueFunction::a_prime_scaled(const BoundaryPoint& b, double y) const {
    const auto& p = params();
    const double q0 = b.r[2] - b.r[1] * b.r[1];
    return (b.r[2] * (p.c - r_tilde(p, b.z, y)) + b.r[1] / (p.rho + p.kappa)) / q0;
}

double ValueFunction::a_of_y(double y) const {
    const auto b = at(y);
    return a_scaled(b, y) * std::exp(-b.log_psi);
}

double ValueFunction::a_of_y_alt(double y) const {
    const auto& p = params();
    const auto b = at(y);
    const double q0 = b.r[2] - b.r[1] * b.r[1];
    const double h = b.r[1] * (p.c - r_tilde(p, b.z, y)) + 1.0 / (p.rho + p.kappa);
    return -h / q0 / p.beta * std::exp(-b.log_psi);
}

double ValueFunction::a_prime(double y) const {
    const auto b = at(y);
    return a_prime_scaled(b, y) * std::exp(-b.log_psi);
}

double ValueFunction::a_prime_h(double y) const {
    const auto& p = params();
    const auto b = at(y);
    const double s = -p.beta * b.r[2] / b.r[1] * a_scaled(b, y) - 1.0 / ((p.rho + p.kappa) * b.r[1]);
    return s * std::exp(-b.log_psi);
}

double ValueFunction::d_tilde_from_a(double y) const {
    const auto& p = params();
    const auto b = at(y);
    return -p.beta * b.r[3] * a_scaled(b, y) - b.r[2] * a_prime_scaled(b, y);
}

double ValueFunction::d_tilde_from_level(double y) const {
    const auto& p = params();
    const auto b = at(y);
    const double rk = p.rho + p.kappa;
    return 2.0 / (p.sigma * p.sigma) *
           (b.z - p.c * p.rho - (p.rho + 2.0 * p.kappa) * p.beta / rk * y - p.kappa * p.beta * b.r[1] * a_scaled(b, y));
}

double ValueFunction::d_tilde_from_nd(double y) const {
    const auto& p = params();
    const auto b = at(y);
    const auto t = ode_terms_scaled(fs_, y, b.z);
    const double q0 = b.r[2] - b.r[1] * b.r[1];
    return t.d / ((p.rho + p.kappa) * q0);
}

void ValueFunction::check_state(State s) const {
    if (!std::isfinite(s.x)) throw DomainError("state x must be finite");
    if (!(s.y >= 0.0 && s.y <= fb_.y_bar())) {
        throw DomainError("state y=" + std::to_string(s.y) + " outside [0, y_bar]");
    }
}

namespace {

Region effective_region(const FreeBoundary& fb, State s) {
    if (s.y == fb.y_bar()) return s.x < fb.x_bar() ? Region::W : Region::I2;
    return region_of(fb, s);
}

}  // namespace

double ValueFunction::w_branch(Region r, State s) const {
    check_state(s);
    const auto& p = params();
    switch (r) {
        case Region::W: {
            const double rv = r_value(p, s.x, s.y);
            if (s.y == fb_.y_bar()) return rv;
            const auto b = at(s.y);
            return a_scaled(b, s.y) * std::exp(fs_.log_psi(s.x + p.beta * s.y) - b.log_psi) + rv;
        }
        case Region::I1: {
            const double yb = fb_.f_inverse(s.x);
            const auto b = at(yb);
            return a_scaled(b, yb) * std::exp(fs_.log_psi(s.x + p.beta * yb) - b.log_psi) + r_value(p, s.x, yb) -
                   p.c * (yb - s.y);
        }
        case Region::I2:
            return r_value(p, s.x, p.y_bar) - p.c * (p.y_bar - s.y);
    }
    return 0.0;
}

WPartials ValueFunction::w_partials_branch(Region r, State s) const {
    check_state(s);
    const auto& p = params();
    const double rk = p.rho + p.kappa;
    switch (r) {
        case Region::W: {
            const auto rp = r_partials(p, s.x, s.y);
            const auto b = at(s.y);
            const double u = s.x + p.beta * s.y;
            const auto ru = fs_.deriv_ratios(2, u);
            const double e = std::exp(fs_.log_psi(u) - b.log_psi);
            const double a = a_scaled(b, s.y);
            return WPartials{
                .w_x = a * e * ru[1] + rp.r_x,
                .w_xx = a * e * ru[2],
                .w_y = a_prime_scaled(b, s.y) * e + p.beta * a * e * ru[1] + rp.r_y,
            };
        }
        case Region::I1: {
            const double yb = fb_.f_inverse(s.x);
            const auto b = at(yb);
            const double u = s.x + p.beta * yb;
            const auto ru = fs_.deriv_ratios(2, u);
            const double ae = a_scaled(b, yb) * std::exp(fs_.log_psi(u) - b.log_psi);
            return WPartials{.w_x = ae * ru[1] + yb / rk, .w_xx = ae * ru[2], .w_y = p.c};
        }
        case Region::I2:
            return WPartials{.w_x = p.y_bar / rk, .w_xx = 0.0, .w_y = p.c};
    }
    return {};
}

double ValueFunction::w_value(State s) const {
    check_state(s);
    return w_branch(effective_region(fb_, s), s);
}

WPartials ValueFunction::w_partials(State s) const {
    check_state(s);
    return w_partials_branch(effective_region(fb_, s), s);
}

HjbResidual ValueFunction::hjb_residual(State s) const {
    check_state(s);
    const auto& p = params();
    if (!(s.y < p.y_bar)) throw DomainError("HJB residual requires y < y_bar");
    const double w = w_value(s);
    const auto d = w_partials(s);
    return HjbResidual{
        .pde = 0.5 * p.sigma * p.sigma * d.w_xx + p.kappa * (p.mu - p.beta * s.y - s.x) * d.w_x - p.rho * w + s.x * s.y,
        .gradient = d.w_y - p.c,
    };
}

double ValueFunction::z_function(double x) const {
    const auto& p = params();
    const double yb = fb_.f_inverse(x);
    const auto d = w_partials_branch(Region::I1, State{x, yb});
    return p.c * p.rho + p.kappa * p.beta * d.w_x - x;
}

double ValueFunction::s_function(State s) const { return w_partials(s).w_y - params().c; }

double ValueFunction::growth_check(double x_lo, double x_hi, int n_x, int y_stride) const {
    if (n_x < 2 || y_stride < 1 || !(x_hi > x_lo)) throw DomainError("growth_check needs n_x >= 2, stride >= 1, x_hi > x_lo");
    const auto ys = fb_.y_grid();
    std::vector<double> sample_y;
    for (std::size_t j = 0; j < ys.size(); j += static_cast<std::size_t>(y_stride)) sample_y.push_back(ys[j]);
    if (sample_y.back() != ys.back()) sample_y.push_back(ys.back());

    double worst = 0.0;
    for (double y : sample_y) {
        for (int i = 0; i < n_x; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / (n_x - 1);
            worst = std::max(worst, std::abs(w_value(State{x, y})) / (1.0 + std::abs(x)));
        }
    }
    return worst;
}

nlohmann::json ValueFunction::to_json() const {
    nlohmann::json j;
    j["params"] = solarinv::to_json(params());
    j["x_tilde"] = fb_.x_tilde();
    j["x0"] = fb_.x0();
    j["x_bar"] = fb_.x_bar();
    j["y_star"] = y_star(fs_);
    auto grid = nlohmann::json::array();
    const auto ys = fb_.y_grid();
    for (double y : ys) grid.push_back({{"y", y}, {"F", fb_.f(y)}, {"A", a_of_y(y)}});
    j["grid"] = std::move(grid);
    return j;
}

// ---------------------------------------------------------------------------

std::vector<HjbResidual> hjb_grid_serial(const ValueFunction& vf, std::span<const double> xs,
                                         std::span<const double> ys) {
    std::vector<HjbResidual> out(xs.size() * ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[j * xs.size() + i] = vf.hjb_residual(State{xs[i], ys[j]});
    }
    return out;
}

std::vector<HjbResidual> hjb_grid(const ValueFunction& vf, std::span<const double> xs, std::span<const double> ys) {
    std::vector<HjbResidual> out(xs.size() * ys.size());
    const auto rows = static_cast<long>(ys.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < rows; ++j) {
        try {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                out[static_cast<std::size_t>(j) * xs.size() + i] = vf.hjb_residual(State{xs[i], ys[j]});
            }
        } catch (...) {
#pragma omp critical(solarinv_hjb_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace solarinv
