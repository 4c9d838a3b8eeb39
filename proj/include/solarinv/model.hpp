#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace solarinv {

/// Economic and dynamical constants of the installation problem.
///
/// Price dynamics: dX = kappa((mu - beta*Y) - X)dt + sigma dW.
/// Running revenue alpha*X*Y, proportional installation cost c.
/// After validate() the cost is the effective cost c/alpha and alpha == 1.
struct ModelParams {
    double kappa = 0.10;
    double mu = 0.20;
    double sigma = 0.50;
    double rho = 0.05;
    double c = 0.30;
    double beta = 0.15;
    double y_bar = 5.0;
    double alpha = 1.0;

    bool operator==(const ModelParams&) const = default;
};

/// Price and installed power. Negative prices are legal.
struct State {
    double x = 0.0;
    double y = 0.0;
};

/// Parameter preset used throughout the numerical section (mu = 0.2).
ModelParams table_preset();

/// Checks positivity constraints and folds alpha into the cost.
/// Throws ValidationError naming the offending field.
ModelParams validate(const ModelParams& raw);

/// Set a field by name ("kappa", "mu", ...). Throws ValidationError for unknown names.
void set_param(ModelParams& p, std::string_view name, double value);
double get_param(const ModelParams& p, std::string_view name);
bool is_param_name(std::string_view name);

/// Expected discounted profit of never installing again:
/// xy/(rho+kappa) + mu*kappa*y/(rho(rho+kappa)) - kappa*beta*y^2/(rho(rho+kappa)).
double r_value(const ModelParams& p, double x, double y);

struct RPartials {
    double r_y;
    double r_xy;
    double r_x;
};

RPartials r_partials(const ModelParams& p, double x, double y);

/// R_y with the free-boundary substitution x -> z - beta*y (used by the boundary ODE).
double r_tilde(const ModelParams& p, double z, double y);

/// Mean-reversion level for installed power y: mu - beta*y.
double line_of_means(const ModelParams& p, double y);

nlohmann::json to_json(const ModelParams& p);

/// Flat object with keys kappa, mu, sigma, rho, c, beta, y_bar and optional alpha (default 1).
/// Returns validated parameters.
ModelParams params_from_json(const nlohmann::json& j);
ModelParams load_params(const std::string& path);

}  // namespace solarinv
