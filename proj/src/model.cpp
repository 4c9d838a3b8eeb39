#include "solarinv/model.hpp"

#include <cmath>
#include <fstream>

#include "solarinv/errors.hpp"

namespace solarinv {

namespace {

struct Field {
    const char* name;
    double ModelParams::*member;
};

constexpr Field kFields[] = {
    {"kappa", &ModelParams::kappa}, {"mu", &ModelParams::mu},       {"sigma", &ModelParams::sigma},
    {"rho", &ModelParams::rho},     {"c", &ModelParams::c},         {"beta", &ModelParams::beta},
    {"y_bar", &ModelParams::y_bar}, {"alpha", &ModelParams::alpha},
};

double ModelParams::*member_for(std::string_view name) {
    for (const auto& f : kFields) {
        if (name == f.name) return f.member;
    }
    throw ValidationError(std::string(name), "unknown parameter name");
}

void require_positive(double v, const char* field) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ValidationError(field, "must be finite and > 0");
}

void check_y(const ModelParams& p, double y) {
    if (!(y >= 0.0 && y <= p.y_bar)) {
        throw DomainError("installed power y=" + std::to_string(y) + " outside [0, y_bar]");
    }
}

}  // namespace

ModelParams table_preset() { return ModelParams{}; }

ModelParams validate(const ModelParams& raw) {
    require_positive(raw.kappa, "kappa");
    require_positive(raw.sigma, "sigma");
    require_positive(raw.rho, "rho");
    require_positive(raw.beta, "beta");
    require_positive(raw.y_bar, "y_bar");
    require_positive(raw.alpha, "alpha");
    if (!std::isfinite(raw.mu)) throw ValidationError("mu", "must be finite");
    if (!std::isfinite(raw.c) || raw.c < 0.0) throw ValidationError("c", "must be finite and >= 0");

    ModelParams p = raw;
    p.c = raw.c / raw.alpha;
    p.alpha = 1.0;
    return p;
}

void set_param(ModelParams& p, std::string_view name, double value) { p.*member_for(name) = value; }

double get_param(const ModelParams& p, std::string_view name) { return p.*member_for(name); }

bool is_param_name(std::string_view name) {
    for (const auto& f : kFields) {
        if (name == f.name) return true;
    }
    return false;
}

double r_value(const ModelParams& p, double x, double y) {
    check_y(p, y);
    const double rk = p.rho + p.kappa;
    return x * y / rk + p.mu * p.kappa * y / (p.rho * rk) - p.kappa * p.beta * y * y / (p.rho * rk);
}

RPartials r_partials(const ModelParams& p, double x, double y) {
    const double rk = p.rho + p.kappa;
    return RPartials{
        .r_y = x / rk + p.mu * p.kappa / (p.rho * rk) - 2.0 * p.kappa * p.beta * y / (p.rho * rk),
        .r_xy = 1.0 / rk,
        .r_x = y / rk,
    };
}

double r_tilde(const ModelParams& p, double z, double y) {
    return (p.mu * p.kappa + p.rho * z - p.beta * (p.rho + 2.0 * p.kappa) * y) / (p.rho * (p.rho + p.kappa));
}

double line_of_means(const ModelParams& p, double y) { return p.mu - p.beta * y; }

nlohmann::json to_json(const ModelParams& p) {
    nlohmann::json j;
    for (const auto& f : kFields) j[f.name] = p.*(f.member);
    return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config", "expected a JSON object");
    ModelParams p;
    p.alpha = 1.0;
    for (const auto& f : kFields) {
        auto it = j.find(f.name);
        if (it == j.end()) {
            if (std::string_view(f.name) == "alpha") continue;
            throw ValidationError(f.name, "missing from parameter file");
        }
        if (!it->is_number()) throw ValidationError(f.name, "must be a number");
        p.*(f.member) = it->get<double>();
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!is_param_name(it.key())) throw ValidationError(it.key(), "unknown parameter name");
    }
    return validate(p);
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config", std::string("parse error: ") + e.what());
    }
    return params_from_json(j);
}

}  // namespace solarinv
