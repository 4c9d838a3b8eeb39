#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "solarinv/boundary.hpp"
#include "solarinv/model.hpp"

namespace solarinv {

class ValueFunction;

enum class PolicyKind { Optimal, NeverInstall, ImmediateFull, Custom };

std::string to_string(PolicyKind k);

/// Installation rule applied after every price step.
///
/// Every kind is a target-level rule Y <- max(Y, min(target(X), y_bar)):
/// Optimal uses the clamped boundary inverse, ImmediateFull targets y_bar,
/// NeverInstall never acts. Custom takes any target function of the price.
struct Policy {
    PolicyKind kind = PolicyKind::Optimal;
    std::function<double(double)> target;

    static Policy optimal() { return {PolicyKind::Optimal, {}}; }
    static Policy never_install() { return {PolicyKind::NeverInstall, {}}; }
    static Policy immediate_full() { return {PolicyKind::ImmediateFull, {}}; }
    static Policy custom(std::function<double(double)> target) { return {PolicyKind::Custom, std::move(target)}; }
};

struct McSettings {
    std::int64_t n_paths = 10000;
    /// Zero selects 1e-3 / kappa.
    double dt = 0.0;
    /// Zero selects 10 / rho.
    double horizon = 0.0;
    std::uint64_t seed = 20240601;
    /// Each path is paired with its sign-flipped twin; payoffs are pair averages.
    bool antithetic = false;
    /// Each step's Gaussian increment is the normalized sum of this many
    /// draws, so a run at dt and refinement k shares its noise with a run at
    /// dt/k and refinement 1.
    int noise_refinement = 1;
    /// Absolute bound allowed for the discounted payoff beyond the horizon.
    double tail_tolerance = 0.05;
};

/// McSettings with zero fields replaced by their defaults; throws ConfigurationError on bad input.
McSettings resolve(const McSettings& s, const ModelParams& p);

struct PathRecord {
    double payoff = 0.0;
    double initial_lump = 0.0;
    double total_installed = 0.0;
    /// -1 when the path never installs; 0 for an initial lump.
    double first_install_time = -1.0;
    /// Sum and count of positive pre-projection overshoots X - F(Y) under reflection.
    double overshoot_sum = 0.0;
    std::int64_t overshoot_count = 0;
};

struct PathTrace {
    std::vector<double> t, x, y, cum_cost;
};

void write_trace_csv(std::ostream& out, const PathTrace& trace);

struct SimulationResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    double discount_tail_bound = 0.0;
    double mean_initial_lump = 0.0;
    double mean_total_installed = 0.0;
    double install_fraction = 0.0;
    double mean_overshoot = 0.0;
    /// One record per path (per antithetic pair when enabled).
    std::vector<PathRecord> paths;
};

nlohmann::json to_json(const SimulationResult& r, bool include_paths = false);

/// Delta = max(0, Fbar^-1(x) - y): the jump at time zero of the optimal policy.
double initial_lump(const FreeBoundary& fb, State s);

/// Euler-Maruyama path of dX = kappa(mu - beta Y - X)dt + sigma dW with the
/// policy applied after each step. Revenue X Y is integrated against the exact
/// discount over each step; installation dY at time t costs c dY e^{-rho t}.
/// The initial lump is charged undiscounted. The driving noise depends only on
/// (seed, path_index), so policies compared with the same seed share paths.
PathRecord simulate_path(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                         const McSettings& settings, std::int64_t path_index, PathTrace* trace = nullptr,
                         int trace_stride = 1);

/// e^{-rho T}(y_bar M / rho + c (y_bar - y)) with M = max(|x|, |mu|, |mu - beta y_bar|) + sigma/sqrt(2 kappa).
double discount_tail_bound(const ModelParams& p, State s, double horizon);

/// Monte Carlo estimate of the discounted payoff. Per-path payoffs are reduced
/// pairwise in index order, so both variants give bit-identical results.
SimulationResult estimate_value_serial(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                                       const McSettings& settings);
SimulationResult estimate_value(const ModelParams& p, const FreeBoundary& fb, const Policy& policy, State s,
                                const McSettings& settings);

/// Order-fixed pairwise summation.
double pairwise_sum(std::span<const double> v);

/// Mean and standard error of per-path differences a - b (common random numbers).
struct PairedDifference {
    double mean;
    double std_error;
};
PairedDifference paired_difference(const SimulationResult& a, const SimulationResult& b);

/// Bias allowance for the discretely monitored reflection:
/// 0.5826 sigma sqrt(dt) y_bar / (rho + kappa).
double reflection_bias_allowance(const ModelParams& p, double dt);

struct DominanceRow {
    State state;
    Region region;
    double analytic_w;
    double analytic_r;
    SimulationResult optimal, never, full;
    PairedDifference gap_never, gap_full;
    double allowance;
    bool value_match, never_match, dominates_never, dominates_full;
};

struct DominanceReport {
    std::vector<DominanceRow> rows;
    bool all_passed() const;
    nlohmann::json to_json() const;
};

/// Optimal, NeverInstall and ImmediateFull at each state on common random numbers.
/// value_match:      |MC optimal - w| <= 3 SE + allowance + tail bound
/// never_match:      |MC never - R|   <= 3 SE + tail bound
/// dominates_*:      mean paired gap  >= -(3 SE_gap + allowance)
DominanceReport dominance_report(const ValueFunction& vf, std::span<const State> states, const McSettings& settings);

/// Three probe states at y = y_bar/5: inside W, inside I1, inside I2.
std::vector<State> default_probe_states(const FreeBoundary& fb);

}  // namespace solarinv
