// Command-line front end: boundary solves, value queries, Monte Carlo checks,
// regime classification and sensitivity sweeps.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "solarinv/boundary.hpp"
#include "solarinv/errors.hpp"
#include "solarinv/model.hpp"
#include "solarinv/simulator.hpp"
#include "solarinv/special_functions.hpp"
#include "solarinv/sweep.hpp"
#include "solarinv/value_function.hpp"

namespace fs = std::filesystem;
using namespace solarinv;
using nlohmann::json;

namespace {

struct Globals {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 20240601;
    std::string out = ".";
    int steps = 2000;
};

ModelParams load_model(const Globals& g) {
    ModelParams p = g.config.empty() ? table_preset() : load_params(g.config);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError(kv, "override must look like name=value");
        const std::string name = kv.substr(0, eq);
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(kv.substr(eq + 1), &used);
            if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ValidationError(name, "override value is not a number");
        }
        set_param(p, name, v);
    }
    return validate(p);
}

fs::path out_file(const Globals& g, const std::string& name) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw ConfigurationError("cannot create output directory " + g.out + ": " + ec.message());
    return fs::path(g.out) / name;
}

template <class Writer>
void write_to(const fs::path& path, Writer&& w) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    w(f);
    if (!f) throw ConfigurationError("write failed for " + path.string());
}

json regime_json(const RegimeReport& r, const FreeBoundary& fb) {
    return {{"regime", to_string(r.regime)}, {"tie", r.tie},          {"y_star", r.y_star},
            {"F0", r.f0},                    {"x_tilde", r.x_tilde}, {"x_bar", fb.x_bar()},
            {"mu", fb.params().mu}};
}

int cmd_boundary(const Globals& g) {
    const ModelParams p = load_model(g);
    FundamentalSolution fsol(p);
    FreeBoundary fb = solve_boundary(fsol, g.steps);
    ValueFunction vf(fsol, fb);
    const auto regime = classify_regime(fsol, fb);

    const auto csv = out_file(g, "boundary.csv");
    write_to(csv, [&](std::ostream& o) { fb.write_csv(o); });
    const auto vjson = out_file(g, "value_function.json");
    write_to(vjson, [&](std::ostream& o) { o << vf.to_json().dump(2) << '\n'; });

    json summary = regime_json(regime, fb);
    summary["x0"] = fb.x0();
    summary["boundary_csv"] = csv.string();
    summary["value_json"] = vjson.string();
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_value(const Globals& g, double x, double y) {
    const ModelParams p = load_model(g);
    FundamentalSolution fsol(p);
    ValueFunction vf(fsol, solve_boundary(fsol, g.steps));
    const State s{x, y};
    const auto d = vf.w_partials(s);
    json j{{"x", x},
           {"y", y},
           {"region", to_string(y == p.y_bar ? Region::W : region_of(vf.boundary(), s))},
           {"w", vf.w_value(s)},
           {"R", r_value(p, x, y)},
           {"w_x", d.w_x},
           {"w_xx", d.w_xx},
           {"w_y", d.w_y},
           {"initial_lump", initial_lump(vf.boundary(), s)}};
    if (y < p.y_bar) {
        const auto h = vf.hjb_residual(s);
        j["hjb"] = {{"pde", h.pde}, {"gradient", h.gradient}};
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct SimulateOptions {
    std::int64_t paths = 10000;
    double dt = 0.0;
    double horizon = 0.0;
    bool antithetic = false;
    std::optional<double> x, y;
    int trace = 0;
};

int cmd_simulate(const Globals& g, const SimulateOptions& o) {
    const ModelParams p = load_model(g);
    FundamentalSolution fsol(p);
    ValueFunction vf(fsol, solve_boundary(fsol, g.steps));
    const auto& fb = vf.boundary();

    McSettings st;
    st.n_paths = o.paths;
    st.dt = o.dt;
    st.horizon = o.horizon;
    st.seed = g.seed;
    st.antithetic = o.antithetic;

    std::vector<State> states;
    if (o.x || o.y) {
        if (!(o.x && o.y)) throw ConfigurationError("--x and --y must be given together");
        states.push_back(State{*o.x, *o.y});
    } else {
        states = default_probe_states(fb);
    }

    const auto report = dominance_report(vf, states, st);
    json j = report.to_json();
    j["seed"] = g.seed;
    j["params"] = to_json(p);
    const auto path = out_file(g, "simulate.json");
    write_to(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });

    for (int k = 0; k < o.trace; ++k) {
        PathTrace trace;
        simulate_path(p, fb, Policy::optimal(), states.front(), st, k, &trace, 10);
        write_to(out_file(g, "trace_optimal_" + std::to_string(k) + ".csv"),
                 [&](std::ostream& out) { write_trace_csv(out, trace); });
    }

    for (const auto& r : report.rows) {
        std::printf("(%.6g, %.6g) %-2s  w=%.6f  mc=%.6f +- %.4f  R=%.6f  never=%.6f  full=%.6f  %s\n", r.state.x,
                    r.state.y, to_string(r.region).c_str(), r.analytic_w, r.optimal.estimate, r.optimal.std_error,
                    r.analytic_r, r.never.estimate, r.full.estimate,
                    (r.value_match && r.never_match && r.dominates_never && r.dominates_full) ? "ok" : "FAILED");
    }
    std::printf("report: %s\n", path.string().c_str());
    if (!report.all_passed()) {
        std::fprintf(stderr, "verification failed: see %s\n", path.string().c_str());
        return exit_code_for(ErrorKind::Verification);
    }
    return 0;
}

int cmd_classify(const Globals& g) {
    const ModelParams p = load_model(g);
    FundamentalSolution fsol(p);
    const FreeBoundary fb = solve_boundary(fsol, g.steps);
    std::cout << regime_json(classify_regime(fsol, fb), fb).dump(2) << '\n';
    return 0;
}

int cmd_sensitivity(const Globals& g, const std::string& param, const std::vector<double>& values) {
    SweepSpec spec;
    spec.param = param;
    spec.values = values;
    spec.base = load_model(g);
    spec.n_steps = g.steps;
    const SweepResult r = run_sweep(spec);

    const auto path = out_file(g, "sensitivity_" + param + ".csv");
    write_to(path, [&](std::ostream& o) { write_sweep_csv(o, r); });

    json shifts = json::array();
    for (std::size_t i = 0; i < r.min_shift.size(); ++i) {
        shifts.push_back({{"from", r.values[i]}, {"to", r.values[i + 1]}, {"min", r.min_shift[i]}, {"max", r.max_shift[i]}});
    }
    std::cout << json{{"param", param}, {"values", r.values}, {"verdict", to_string(r.verdict)}, {"shifts", shifts},
                      {"csv", path.string()}}
                     .dump(2)
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal solar-panel installation under mean-reverting electricity prices"};
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "JSON parameter file (defaults to the built-in preset)")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "Parameter override name=value (repeatable)");
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--steps", g.steps, "Boundary ODE steps")->check(CLI::Range(100, 10000000))->capture_default_str();

    auto* boundary = app.add_subcommand("boundary", "Solve the free boundary; write boundary.csv and value_function.json");
    auto* classify = app.add_subcommand("classify", "Report the regime of the line of means");

    double vx = 0.0, vy = 0.0;
    auto* value = app.add_subcommand("value", "Evaluate w and its partial derivatives at one state");
    value->add_option("--x", vx, "Price")->required();
    value->add_option("--y", vy, "Installed power")->required();

    SimulateOptions so;
    double sx = 0.0, sy = 0.0;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison of the optimal policy with baselines");
    simulate->add_option("--paths", so.paths, "Number of paths")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--dt", so.dt, "Time step (default 1e-3/kappa)")->check(CLI::PositiveNumber);
    simulate->add_option("--horizon", so.horizon, "Horizon (default 10/rho)")->check(CLI::PositiveNumber);
    simulate->add_flag("--antithetic", so.antithetic, "Use antithetic pairs");
    auto* ox = simulate->add_option("--x", sx, "Initial price (default: three probe states)");
    auto* oy = simulate->add_option("--y", sy, "Initial installed power");
    simulate->add_option("--trace", so.trace, "Write t,X,Y,cum_cost traces for the first k optimal paths")
        ->check(CLI::NonNegativeNumber);

    std::string param;
    std::vector<double> values;
    auto* sensitivity = app.add_subcommand("sensitivity", "Sweep one parameter and compare boundaries");
    sensitivity->add_option("--param", param, "Parameter name")->required();
    sensitivity->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*boundary) return cmd_boundary(g);
        if (*classify) return cmd_classify(g);
        if (*value) return cmd_value(g, vx, vy);
        if (*simulate) {
            if (*ox) so.x = sx;
            if (*oy) so.y = sy;
            return cmd_simulate(g, so);
        }
        if (*sensitivity) return cmd_sensitivity(g, param, values);
    } catch (const ValidationError& e) {
        std::cerr << "invalid parameter " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
