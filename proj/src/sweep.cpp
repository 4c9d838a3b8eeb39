#include "solarinv/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <ostream>

#include "solarinv/errors.hpp"

namespace solarinv {

std::string to_string(ShiftVerdict v) {
    switch (v) {
        case ShiftVerdict::Increasing: return "increasing";
        case ShiftVerdict::Decreasing: return "decreasing";
        case ShiftVerdict::Crossing: return "crossing";
    }
    return "?";
}

namespace {

struct Prepared {
    std::vector<double> values;
    std::vector<ModelParams> params;
};

Prepared prepare(const SweepSpec& spec) {
    if (!is_param_name(spec.param) || spec.param == "alpha") {
        throw ValidationError(spec.param, "not a sweepable model parameter");
    }
    if (spec.values.size() < 2) throw ConfigurationError("a sweep needs at least two values");
    Prepared out;
    out.values = spec.values;
    std::sort(out.values.begin(), out.values.end());
    out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
    if (out.values.size() < 2) throw ConfigurationError("a sweep needs at least two distinct values");
    for (double v : out.values) {
        ModelParams p = spec.base;
        set_param(p, spec.param, v);
        try {
            out.params.push_back(validate(p));
        } catch (const ValidationError& e) {
            char value[40];
            std::snprintf(value, sizeof value, "%.12g", v);
            const std::string what = e.what();
            throw ValidationError(e.field(), what.substr(e.field().size() + 2) + " (sweep value " + value + ")");
        }
    }
    return out;
}

[[noreturn]] void rethrow_with_value(const std::string& param, double value) {
    char prefix[96];
    std::snprintf(prefix, sizeof prefix, "sweep %s=%.12g: ", param.c_str(), value);
    try {
        throw;
    } catch (const Error& e) {
        throw Error(e.kind(), prefix + std::string(e.what()));
    }
}

FreeBoundary solve_one(const SweepSpec& spec, double value, const ModelParams& p) {
    try {
        FundamentalSolution fs(p);
        return solve_boundary(fs, spec.n_steps);
    } catch (const Error&) {
        rethrow_with_value(spec.param, value);
    }
}

SweepResult finish(const SweepSpec& spec, Prepared prep, std::vector<FreeBoundary> fbs, int n_common) {
    if (n_common < 2) throw ConfigurationError("n_common must be at least 2");
    SweepResult r;
    r.param = spec.param;
    r.values = std::move(prep.values);
    r.boundaries = std::move(fbs);

    double y_max = r.boundaries.front().y_bar();
    for (const auto& fb : r.boundaries) y_max = std::min(y_max, fb.y_bar());
    for (int i = 0; i < n_common; ++i) r.common_y.push_back(y_max * i / (n_common - 1));

    bool all_up = true, all_down = true;
    for (std::size_t i = 0; i + 1 < r.boundaries.size(); ++i) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < r.common_y.size(); ++k) {
            const double d = r.boundaries[i + 1].f(r.common_y[k]) - r.boundaries[i].f(r.common_y[k]);
            lo = (k == 0) ? d : std::min(lo, d);
            hi = (k == 0) ? d : std::max(hi, d);
        }
        r.min_shift.push_back(lo);
        r.max_shift.push_back(hi);
        all_up = all_up && lo > 0.0;
        all_down = all_down && hi < 0.0;
    }
    r.verdict = all_up ? ShiftVerdict::Increasing : all_down ? ShiftVerdict::Decreasing : ShiftVerdict::Crossing;
    return r;
}

}  // namespace

SweepResult run_sweep_serial(const SweepSpec& spec, int n_common) {
    Prepared prep = prepare(spec);
    std::vector<FreeBoundary> fbs;
    for (std::size_t i = 0; i < prep.values.size(); ++i) fbs.push_back(solve_one(spec, prep.values[i], prep.params[i]));
    return finish(spec, std::move(prep), std::move(fbs), n_common);
}

SweepResult run_sweep(const SweepSpec& spec, int n_common) {
    Prepared prep = prepare(spec);
    const auto n = static_cast<long>(prep.values.size());
    std::vector<FreeBoundary> fbs(prep.values.size());
    std::vector<std::exception_ptr> errors(prep.values.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            fbs[i] = solve_one(spec, prep.values[i], prep.params[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    // Report the smallest failing value regardless of thread timing.
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return finish(spec, std::move(prep), std::move(fbs), n_common);
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << "param_value,y,F\n";
    char buf[128];
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const auto& fb = r.boundaries[i];
        const auto ys = fb.y_grid();
        const auto zs = fb.f_tilde_grid();
        const double beta = fb.params().beta;
        for (std::size_t k = 0; k < ys.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.values[i], ys[k], zs[k] - beta * ys[k]);
            out << buf;
        }
    }
}

}  // namespace solarinv
