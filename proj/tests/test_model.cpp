#include <doctest.h>

#include <cmath>

#include "solarinv/errors.hpp"
#include "solarinv/model.hpp"

using namespace solarinv;

namespace {
ModelParams preset() { return validate(table_preset()); }
}  // namespace

TEST_CASE("table preset is accepted unchanged") {
    const ModelParams p = preset();
    CHECK(p.kappa == 0.10);
    CHECK(p.mu == 0.20);
    CHECK(p.sigma == 0.50);
    CHECK(p.rho == 0.05);
    CHECK(p.c == 0.30);
    CHECK(p.beta == 0.15);
    CHECK(p.y_bar == 5.0);
    CHECK(p.alpha == 1.0);
}

TEST_CASE("validation names the offending field") {
    for (const char* name : {"kappa", "sigma", "rho", "beta", "y_bar", "alpha"}) {
        ModelParams p = table_preset();
        set_param(p, name, 0.0);
        try {
            validate(p);
            FAIL("accepted zero ", name);
        } catch (const ValidationError& e) {
            CHECK(e.field() == name);
            CHECK(e.kind() == ErrorKind::Validation);
        }
    }
    ModelParams p = table_preset();
    p.c = -0.1;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = table_preset();
    p.c = 0.0;
    CHECK_NOTHROW(validate(p));
    p.mu = std::nan("");
    CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("alpha is folded into the cost") {
    ModelParams p = table_preset();
    p.alpha = 2.0;
    p.c = 0.6;
    const ModelParams v = validate(p);
    CHECK(v.c == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(v.alpha == 1.0);
}

TEST_CASE("R vanishes without installed power") {
    const ModelParams p = preset();
    for (double x : {-3.0, 0.0, 0.7, 12.0}) CHECK(r_value(p, x, 0.0) == 0.0);
}

TEST_CASE("R at a hand-computed point") {
    // 2/0.15 + 0.2*0.1*2/(0.05*0.15) - 0.1*0.15*4/(0.05*0.15) = 40/3 + 16/3 - 8 = 32/3
    CHECK(r_value(preset(), 1.0, 2.0) == doctest::Approx(32.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("R rejects y outside the capacity range") {
    const ModelParams p = preset();
    CHECK_THROWS_AS(r_value(p, 0.0, -1e-9), DomainError);
    CHECK_THROWS_AS(r_value(p, 0.0, p.y_bar + 1e-9), DomainError);
}

TEST_CASE("closed-form partials of R") {
    const ModelParams p = preset();
    CHECK(r_partials(p, 1.0, 2.0).r_xy == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    const double x = 0.8;
    CHECK(r_partials(p, x, 0.0).r_y ==
          doctest::Approx(x / (p.rho + p.kappa) + p.mu * p.kappa / (p.rho * (p.rho + p.kappa))).epsilon(1e-14));

    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double xx = -2.0 + 0.5 * i;
            const double y = 0.3 + 0.45 * j;
            const double h = 1e-5 * (1.0 + std::abs(y));
            const auto d = r_partials(p, xx, y);
            const double fd_y = (r_value(p, xx, y + h) - r_value(p, xx, y - h)) / (2 * h);
            const double fd_x = (r_value(p, xx + h, y) - r_value(p, xx - h, y)) / (2 * h);
            const double fd_xy =
                (r_partials(p, xx + h, y).r_y - r_partials(p, xx - h, y).r_y) / (2 * h);
            worst = std::max({worst, std::abs(fd_y - d.r_y) / (1.0 + std::abs(d.r_y)),
                              std::abs(fd_x - d.r_x) / (1.0 + std::abs(d.r_x)),
                              std::abs(fd_xy - d.r_xy) / (1.0 + std::abs(d.r_xy))});
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("R solves the inhomogeneous generator equation") {
    const ModelParams p = preset();
    for (double x : {-2.0, 0.0, 0.4, 3.0}) {
        for (double y : {0.0, 1.0, 2.5, 5.0}) {
            const auto d = r_partials(p, x, y);
            // R is linear in x, so R_xx = 0.
            const double res = p.kappa * (p.mu - p.beta * y - x) * d.r_x - p.rho * r_value(p, x, y) + x * y;
            CHECK(std::abs(res) < 1e-9);
        }
    }
}

TEST_CASE("R is linear in x and concave in y") {
    const ModelParams p = preset();
    const double y = 2.0;
    CHECK(r_value(p, 2.0, y) - r_value(p, 1.0, y) == doctest::Approx(r_value(p, 1.0, y) - r_value(p, 0.0, y)));
    const double x = 0.5;
    CHECK(r_value(p, x, 1.0) + r_value(p, x, 3.0) < 2.0 * r_value(p, x, 2.0));
}

TEST_CASE("line of means") {
    const ModelParams p = preset();
    CHECK(line_of_means(p, 0.0) == p.mu);
    CHECK(line_of_means(p, 5.0) == doctest::Approx(-0.55).epsilon(1e-14));
    CHECK(line_of_means(p, 1.0) > line_of_means(p, 2.0));
}

TEST_CASE("JSON parameter files") {
    const nlohmann::json full = {{"kappa", 0.1}, {"mu", 1.4}, {"sigma", 0.5}, {"rho", 0.05},
                                 {"c", 0.6},     {"beta", 0.15}, {"y_bar", 5.0}, {"alpha", 2.0}};
    const ModelParams p = params_from_json(full);
    CHECK(p.mu == 1.4);
    CHECK(p.c == doctest::Approx(0.3));

    nlohmann::json no_alpha = full;
    no_alpha.erase("alpha");
    CHECK(params_from_json(no_alpha).c == 0.6);

    nlohmann::json missing = full;
    missing.erase("sigma");
    CHECK_THROWS_AS(params_from_json(missing), ValidationError);

    nlohmann::json extra = full;
    extra["gamma"] = 1.0;
    CHECK_THROWS_AS(params_from_json(extra), ValidationError);

    nlohmann::json bad = full;
    bad["rho"] = "fast";
    CHECK_THROWS_AS(params_from_json(bad), ValidationError);

    CHECK(params_from_json(to_json(preset())) == preset());
    CHECK_THROWS_AS(load_params("/nonexistent/params.json"), ValidationError);
}

TEST_CASE("parameter access by name") {
    ModelParams p = table_preset();
    set_param(p, "mu", 2.25);
    CHECK(get_param(p, "mu") == 2.25);
    CHECK(is_param_name("y_bar"));
    CHECK_FALSE(is_param_name("ybar"));
    CHECK_THROWS_AS(set_param(p, "ybar", 1.0), ValidationError);
}
