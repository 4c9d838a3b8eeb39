#include "solarinv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "solarinv/errors.hpp"
#include "solarinv/value_function.hpp"

namespace solarinv {

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Optimal: return "Optimal";
        case PolicyKind::NeverInstall: return "NeverInstall";
        case PolicyKind::ImmediateFull: return "ImmediateFull";
        case PolicyKind::Custom: return "Custom";
    }
    return "?";
}

McSettings resolve(const McSettings& s, const ModelParams& p) {
    McSettings r = s;
    if (r.dt == 0.0) r.dt = 1e-3 / p.kappa;
    if (r.horizon == 0.0) r.horizon = 10.0 / p.rho;
    if (r.n_paths < 1) throw ConfigurationError("n_paths must be at least 1");
    if (!(r.dt > 0.0) || !std::isfinite(r.dt)) throw ConfigurationError("dt must be positive");
    if (!(r.horizon > r.dt) || !std::isfinite(r.horizon)) throw ConfigurationError("horizon must exceed dt");
    if (r.noise_refinement < 1) throw ConfigurationError("noise_refinement must be at least 1");
    if (!(r.tail_tolerance > 0.0)) throw ConfigurationError("tail_tolerance must be positive");
    return r;
}

double initial_lump(const FreeBoundary& fb, State s) { return std::max(0.0, fb.f_bar_inverse(s.x) - s.y); }

double discount_tail_bound(const ModelParams& p, State s, double horizon) {
    const double m = std::max({std::abs(s.x), std::abs(p.mu), std::abs(p.mu - p.beta * p.y_bar)}) +
                     p.sigma / std::sqrt(2.0 * p.kappa);
    return std::exp(-p.rho * horizon) * (p.y_bar * m / p.rho + p.c * std::max(0.0, p.y_bar - s.y));
}

double reflection_bias_allowance(const ModelParams& p, double dt) {
    return 0.5826 * p.sigma * std::sqrt(dt) * p.y_bar / (p.rho + p.kappa);
}

void write_trace_csv(std::ostream& out, const PathTrace& trace) {
    out << "t,X,Y,cum_cost\n";
    char buf[160];
    for (std::size_t i = 0; i < trace.t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g\n", trace.t[i], trace.x[i], trace.y[i],
                      trace.cum_cost[i]);
        out << buf;
    }
}

namespace {

boost::random::mt19937_64 path_engine(std::uint64_t seed, std::int64_t index) {
    const auto i = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    return boost::random::mt19937_64(seq);
}

/// Target installed level for the current price, before clamping to [Y, y_bar].
double target_level(const FreeBoundary& fb, const Policy& policy, double x, double y) {
    switch (policy.kind) {
        case PolicyKind::Optimal: return fb.f_bar_inverse(x);
        case PolicyKind::NeverInstall: return y;
        case PolicyKind::ImmediateFull: return fb.y_bar();
        case PolicyKind::Custom: return policy.target(x);
    }
    return y;
}

PathRecord run_path(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                    const McSettings& st, std::int64_t index, double sign, PathTrace* trace, int stride) {
    if (policy.kind == PolicyKind::Custom && !policy.target) throw ConfigurationError("custom policy has no target");
    if (!(s.y >= 0.0 && s.y <= fb.y_bar())) throw DomainError("initial y outside [0, y_bar]");

    auto engine = path_engine(st.seed, index);
    boost::random::normal_distribution<double> normal;

    const auto n_steps = static_cast<std::int64_t>(std::llround(st.horizon / st.dt));
    const double dt = st.horizon / static_cast<double>(n_steps);
    const double vol = p.sigma * std::sqrt(dt) / std::sqrt(static_cast<double>(st.noise_refinement));
    const double step_discount = std::exp(-p.rho * dt);
    const double revenue_weight = -std::expm1(-p.rho * dt) / p.rho;
    const double y_bar = fb.y_bar();

    PathRecord rec;
    double x = s.x, y = s.y;
    double cost = 0.0, revenue = 0.0, disc = 1.0;

    const double lump = std::max(0.0, std::min(target_level(fb, policy, x, y), y_bar) - y);
    if (lump > 0.0) {
        y += lump;
        cost += p.c * lump;
        rec.initial_lump = lump;
        rec.first_install_time = 0.0;
    }
    // Below this price the optimal rule never acts, so the inverse lookup is skipped.
    double threshold = (y < y_bar) ? fb.f(y) : std::numeric_limits<double>::infinity();

    const auto record = [&](double t) {
        trace->t.push_back(t);
        trace->x.push_back(x);
        trace->y.push_back(y);
        trace->cum_cost.push_back(cost);
    };
    if (trace) record(0.0);

    for (std::int64_t n = 0; n < n_steps; ++n) {
        revenue += disc * revenue_weight * x * y;

        double z = 0.0;
        for (int k = 0; k < st.noise_refinement; ++k) z += normal(engine);
        x += p.kappa * (p.mu - p.beta * y - x) * dt + sign * vol * z;
        disc *= step_discount;
        if (!std::isfinite(x)) throw SimulationError("non-finite price at step " + std::to_string(n + 1));

        double y_new = y;
        switch (policy.kind) {
            case PolicyKind::NeverInstall:
            case PolicyKind::ImmediateFull:
                break;
            case PolicyKind::Optimal:
                if (x > threshold) {
                    rec.overshoot_sum += x - threshold;
                    ++rec.overshoot_count;
                    y_new = std::max(y, std::min(fb.f_bar_inverse(x), y_bar));
                }
                break;
            case PolicyKind::Custom:
                y_new = std::max(y, std::min(policy.target(x), y_bar));
                break;
        }
        if (y_new > y) {
            cost += p.c * (y_new - y) * disc;
            if (rec.first_install_time < 0.0) rec.first_install_time = static_cast<double>(n + 1) * dt;
            y = y_new;
            threshold = (y < y_bar) ? fb.f(y) : std::numeric_limits<double>::infinity();
        }
        if (trace && (n + 1) % stride == 0) record(static_cast<double>(n + 1) * dt);
    }

    rec.payoff = revenue - cost;
    rec.total_installed = y - s.y;
    return rec;
}

SimulationResult summarize(std::vector<PathRecord> recs, const McSettings& st, double tail) {
    SimulationResult r;
    const auto n = static_cast<double>(recs.size());
    std::vector<double> buf(recs.size());

    const auto mean_of = [&](auto field) {
        for (std::size_t i = 0; i < recs.size(); ++i) buf[i] = field(recs[i]);
        return pairwise_sum(buf) / n;
    };
    r.estimate = mean_of([](const PathRecord& q) { return q.payoff; });
    const double mean = r.estimate;
    if (recs.size() > 1) {
        const double var = mean_of([mean](const PathRecord& q) { return (q.payoff - mean) * (q.payoff - mean); }) *
                           n / (n - 1.0);
        r.std_error = std::sqrt(var / n);
    }
    r.mean_initial_lump = mean_of([](const PathRecord& q) { return q.initial_lump; });
    r.mean_total_installed = mean_of([](const PathRecord& q) { return q.total_installed; });
    r.install_fraction = mean_of([](const PathRecord& q) { return q.total_installed > 0.0 ? 1.0 : 0.0; });
    const double os = mean_of([](const PathRecord& q) { return q.overshoot_sum; });
    const double oc = mean_of([](const PathRecord& q) { return static_cast<double>(q.overshoot_count); });
    r.mean_overshoot = oc > 0.0 ? os / oc : 0.0;

    r.n_paths = static_cast<std::int64_t>(recs.size());
    r.dt = st.horizon / std::llround(st.horizon / st.dt);
    r.horizon = st.horizon;
    r.discount_tail_bound = tail;
    r.paths = std::move(recs);
    return r;
}

double checked_tail(const ModelParams& p, State s, const McSettings& st) {
    const double tail = discount_tail_bound(p, s, st.horizon);
    if (tail > st.tail_tolerance) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "discount tail bound %.4g exceeds tolerance %.4g; lengthen the horizon (currently %.4g)", tail,
                      st.tail_tolerance, st.horizon);
        throw ConfigurationError(buf);
    }
    return tail;
}

}  // namespace

PathRecord simulate_path(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                         const McSettings& settings, std::int64_t path_index, PathTrace* trace, int trace_stride) {
    const McSettings st = resolve(settings, p);
    if (trace_stride < 1) throw ConfigurationError("trace stride must be at least 1");
    PathRecord a = run_path(p, fb, policy, s, st, path_index, 1.0, trace, trace_stride);
    if (!st.antithetic) return a;
    const PathRecord b = run_path(p, fb, policy, s, st, path_index, -1.0, nullptr, 1);
    a.payoff = 0.5 * (a.payoff + b.payoff);
    a.total_installed = 0.5 * (a.total_installed + b.total_installed);
    if (a.first_install_time < 0.0 || (b.first_install_time >= 0.0 && b.first_install_time < a.first_install_time)) {
        a.first_install_time = b.first_install_time;
    }
    a.overshoot_sum += b.overshoot_sum;
    a.overshoot_count += b.overshoot_count;
    return a;
}

SimulationResult estimate_value_serial(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                                       const McSettings& settings) {
    const McSettings st = resolve(settings, p);
    const double tail = checked_tail(p, s, st);
    std::vector<PathRecord> recs(static_cast<std::size_t>(st.n_paths));
    for (std::int64_t i = 0; i < st.n_paths; ++i) recs[static_cast<std::size_t>(i)] = simulate_path(p, fb, policy, s, st, i);
    return summarize(std::move(recs), st, tail);
}

SimulationResult estimate_value(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                                const McSettings& settings) {
    const McSettings st = resolve(settings, p);
    const double tail = checked_tail(p, s, st);
    std::vector<PathRecord> recs(static_cast<std::size_t>(st.n_paths));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < st.n_paths; ++i) {
        try {
            recs[static_cast<std::size_t>(i)] = simulate_path(p, fb, policy, s, st, i);
        } catch (...) {
#pragma omp critical(solarinv_mc_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(std::move(recs), st, tail);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

PairedDifference paired_difference(const SimulationResult& a, const SimulationResult& b) {
    if (a.paths.size() != b.paths.size() || a.paths.empty()) {
        throw ConfigurationError("paired difference needs runs with equal, non-zero path counts");
    }
    const std::size_t n = a.paths.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a.paths[i].payoff - b.paths[i].payoff;
    const double mean = pairwise_sum(d) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    for (auto& v : d) v = (v - mean) * (v - mean);
    const double var = pairwise_sum(d) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

nlohmann::json to_json(const SimulationResult& r, bool include_paths) {
    nlohmann::json j{{"estimate", r.estimate},
                     {"std_error", r.std_error},
                     {"n_paths", r.n_paths},
                     {"dt", r.dt},
                     {"horizon", r.horizon},
                     {"discount_tail_bound", r.discount_tail_bound},
                     {"mean_initial_lump", r.mean_initial_lump},
                     {"mean_total_installed", r.mean_total_installed},
                     {"install_fraction", r.install_fraction},
                     {"mean_overshoot", r.mean_overshoot}};
    if (include_paths) {
        auto arr = nlohmann::json::array();
        for (const auto& q : r.paths) {
            arr.push_back({{"payoff", q.payoff},
                           {"initial_lump", q.initial_lump},
                           {"total_installed", q.total_installed},
                           {"first_install_time", q.first_install_time}});
        }
        j["paths"] = std::move(arr);
    }
    return j;
}

// ---------------------------------------------------------------------------

bool DominanceReport::all_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const DominanceRow& r) {
        return r.value_match && r.never_match && r.dominates_never && r.dominates_full;
    });
}

nlohmann::json DominanceReport::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"x", r.state.x},
                       {"y", r.state.y},
                       {"region", to_string(r.region)},
                       {"analytic_w", r.analytic_w},
                       {"analytic_R", r.analytic_r},
                       {"optimal", solarinv::to_json(r.optimal)},
                       {"never_install", solarinv::to_json(r.never)},
                       {"immediate_full", solarinv::to_json(r.full)},
                       {"gap_vs_never", {{"mean", r.gap_never.mean}, {"std_error", r.gap_never.std_error}}},
                       {"gap_vs_full", {{"mean", r.gap_full.mean}, {"std_error", r.gap_full.std_error}}},
                       {"dt_bias_allowance", r.allowance},
                       {"checks",
                        {{"value_match", r.value_match},
                         {"never_match", r.never_match},
                         {"dominates_never", r.dominates_never},
                         {"dominates_full", r.dominates_full}}}});
    }
    return {{"rows", std::move(arr)}, {"all_passed", all_passed()}};
}

DominanceReport dominance_report(const ValueFunction& vf, std::span<const State> states, const McSettings& settings) {
    const auto& p = vf.params();
    const auto& fb = vf.boundary();
    const McSettings st = resolve(settings, p);
    DominanceReport rep;
    for (const State s : states) {
        DominanceRow row{};
        row.state = s;
        row.region = (s.y == fb.y_bar()) ? Region::W : region_of(fb, s);
        row.analytic_w = vf.w_value(s);
        row.analytic_r = r_value(p, s.x, s.y);
        row.optimal = estimate_value(p, fb, Policy::optimal(), s, st);
        row.never = estimate_value(p, fb, Policy::never_install(), s, st);
        row.full = estimate_value(p, fb, Policy::immediate_full(), s, st);
        row.gap_never = paired_difference(row.optimal, row.never);
        row.gap_full = paired_difference(row.optimal, row.full);
        row.allowance = reflection_bias_allowance(p, row.optimal.dt);

        const double tail = row.optimal.discount_tail_bound;
        row.value_match = std::abs(row.optimal.estimate - row.analytic_w) <=
                          3.0 * row.optimal.std_error + row.allowance + tail;
        row.never_match = std::abs(row.never.estimate - row.analytic_r) <= 3.0 * row.never.std_error + tail;
        row.dominates_never = row.gap_never.mean >= -(3.0 * row.gap_never.std_error + row.allowance);
        row.dominates_full = row.gap_full.mean >= -(3.0 * row.gap_full.std_error + row.allowance);
        // Per-path records are only needed for the paired gaps.
        row.optimal.paths.clear();
        row.never.paths.clear();
        row.full.paths.clear();
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<State> default_probe_states(const FreeBoundary& fb) {
    const double y0 = 0.2 * fb.y_bar();
    const double f = fb.f(y0);
    const double d = fb.x_bar() - f;
    const double pad = std::max(d, 0.3);
    return {State{f - pad, y0}, State{f + 0.5 * d, y0}, State{fb.x_bar() + pad, y0}};
}

}  // namespace solarinv
