#include <doctest.h>

#include <omp.h>

#include <string>
#include <vector>

#include "solarinv/errors.hpp"
#include "solarinv/simulator.hpp"
#include "solarinv/sweep.hpp"
#include "solarinv/value_function.hpp"

using namespace solarinv;

namespace {

struct Threads {
    explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
    int saved;
};

const ValueFunction& model() {
    static const ValueFunction vf = [] {
        ModelParams p = table_preset();
        p.mu = 1.4;
        FundamentalSolution fs(validate(p));
        return ValueFunction(fs, solve_boundary(fs));
    }();
    return vf;
}

}  // namespace

TEST_CASE("Monte Carlo: threaded and serial estimates are bit-identical") {
    Threads t(4);
    const auto& vf = model();
    McSettings s;
    s.n_paths = 700;  // not a multiple of the chunk size
    s.dt = 0.05;
    for (const auto& policy : {Policy::optimal(), Policy::never_install(), Policy::immediate_full()}) {
        CAPTURE(to_string(policy.kind));
        for (bool anti : {false, true}) {
            s.antithetic = anti;
            const auto a = estimate_value_serial(vf.params(), vf.boundary(), policy, {0.8, 0.5}, s);
            const auto b = estimate_value(vf.params(), vf.boundary(), policy, {0.8, 0.5}, s);
            CHECK(a.estimate == b.estimate);
            CHECK(a.std_error == b.std_error);
            CHECK(a.mean_overshoot == b.mean_overshoot);
            CHECK(a.mean_total_installed == b.mean_total_installed);
            REQUIRE(a.paths.size() == b.paths.size());
            for (std::size_t i = 0; i < a.paths.size(); ++i) CHECK(a.paths[i].payoff == b.paths[i].payoff);
        }
    }
}

TEST_CASE("Monte Carlo: result does not depend on the thread count") {
    const auto& vf = model();
    McSettings s;
    s.n_paths = 300;
    s.dt = 0.05;
    std::vector<double> est;
    for (int n : {1, 2, 3, 4}) {
        Threads t(n);
        est.push_back(estimate_value(vf.params(), vf.boundary(), Policy::optimal(), {1.5, 0.0}, s).estimate);
    }
    for (double e : est) CHECK(e == est.front());
}

TEST_CASE("Monte Carlo: errors inside worker threads propagate") {
    Threads t(4);
    const auto& vf = model();
    McSettings s;
    s.n_paths = 200;
    s.dt = 0.05;
    const auto bad = Policy::custom([](double x) -> double {
        if (x > 1.0) throw SimulationError("target failed");
        return 0.0;
    });
    CHECK_THROWS_AS(estimate_value(vf.params(), vf.boundary(), bad, {0.8, 0.0}, s), SimulationError);
}

TEST_CASE("HJB grid: threaded equals serial") {
    Threads t(4);
    const auto& vf = model();
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) xs.push_back(-1.0 + 0.1 * i);
    for (int j = 0; j < 25; ++j) ys.push_back(0.19 * j);
    const auto a = hjb_grid_serial(vf, xs, ys);
    const auto b = hjb_grid(vf, xs, ys);
    REQUIRE(a.size() == xs.size() * ys.size());
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].pde == b[k].pde);
        CHECK(a[k].gradient == b[k].gradient);
    }
    ys.push_back(vf.params().y_bar);
    CHECK_THROWS_AS(hjb_grid(vf, xs, ys), DomainError);
}

TEST_CASE("sweeps: threaded equals serial") {
    Threads t(4);
    SweepSpec s;
    s.param = "kappa";
    s.values = {0.1, 0.15, 0.2, 0.25};
    s.n_steps = 400;
    const auto a = run_sweep_serial(s);
    const auto b = run_sweep(s);
    CHECK(a.values == b.values);
    CHECK(a.min_shift == b.min_shift);
    CHECK(a.max_shift == b.max_shift);
    CHECK(a.verdict == b.verdict);

    s.param = "sigma";
    s.values = {0.5, 0.6, 0.7};
    s.n_steps = 50;
    try {
        run_sweep(s);
        FAIL("too few steps accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
        CHECK(std::string(e.what()).rfind("sweep sigma=0.5: ", 0) == 0);
    }
}
