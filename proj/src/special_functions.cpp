#include "solarinv/special_functions.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>

#include "solarinv/errors.hpp"

namespace solarinv {

namespace {

constexpr int kMaxMoments = 8;

struct Rule {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;
};

Rule make_gauss_legendre(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        r.nodes[i] = 0.5 * (1.0 - z);
        r.nodes[n - 1 - i] = 0.5 * (1.0 + z);
        r.weights[i] = 0.5 * w;
        r.weights[n - 1 - i] = 0.5 * w;
    }
    return r;
}

const Rule& gauss_legendre(int n) {
    static const auto rules = [] {
        std::array<Rule, 11> out;
        for (int e = 0; e < 11; ++e) out[e] = make_gauss_legendre(1 << e);
        return out;
    }();
    const int e = std::countr_zero(static_cast<unsigned>(n));
    if (n <= 0 || (1 << e) != n || e >= static_cast<int>(rules.size())) {
        throw NumericalError("unsupported Gauss-Legendre order " + std::to_string(n), 0.0);
    }
    return rules[e];
}

/// e^ref * sums[k] approximates M_k.
struct ScaledSums {
    double ref = -std::numeric_limits<double>::infinity();
    std::array<double, kMaxMoments> sums{};
};

struct Node {
    double log_f;   // log of integrand (k = 0) times weight
    double log_t;
};

ScaledSums integrate(double p, double b, int count, int n, const QuadratureSettings& q) {
    thread_local std::vector<Node> nodes;
    nodes.clear();
    const Rule& rule = gauss_legendre(n);

    // [0, 1] with t = u^m.
    const int m = std::max(1, static_cast<int>(std::ceil(8.0 / p)));
    const double log_m = std::log(static_cast<double>(m));
    for (int i = 0; i < n; ++i) {
        const double u = rule.nodes[i];
        const double log_u = std::log(u);
        const double t = std::pow(u, m);
        nodes.push_back({std::log(rule.weights[i]) + log_m + (m * p - 1.0) * log_u - 0.5 * t * t + b * t,
                         m * log_u});
    }

    // [1, T] in panels.
    const double t_end = std::max(b, 0.0) + q.tail_margin;
    if (t_end > 1.0) {
        const int panels = static_cast<int>(std::ceil((t_end - 1.0) / q.panel_width));
        const double h = (t_end - 1.0) / panels;
        for (int j = 0; j < panels; ++j) {
            const double t0 = 1.0 + j * h;
            for (int i = 0; i < n; ++i) {
                const double t = t0 + h * rule.nodes[i];
                const double log_t = std::log(t);
                nodes.push_back({std::log(h * rule.weights[i]) + (p - 1.0) * log_t - 0.5 * t * t + b * t, log_t});
            }
        }
    }

    ScaledSums s;
    for (const auto& nd : nodes) s.ref = std::max(s.ref, nd.log_f);
    for (const auto& nd : nodes) {
        const double base = std::exp(nd.log_f - s.ref);
        if (base == 0.0) continue;
        double tk = 1.0;
        const double t = std::exp(nd.log_t);
        for (int k = 0; k < count; ++k) {
            s.sums[k] += base * tk;
            tk *= t;
        }
    }
    return s;
}

}  // namespace

void log_moments(double p, double b, std::span<double> out, const QuadratureSettings& q) {
    const int count = static_cast<int>(out.size());
    if (!(p > 0.0) || !std::isfinite(b)) throw DomainError("log_moments requires p > 0 and finite b");
    if (count < 1 || count > kMaxMoments) throw DomainError("log_moments supports 1..8 moments");

    int n = q.initial_nodes;
    ScaledSums prev = integrate(p, b, count, n, q);
    double diff = std::numeric_limits<double>::infinity();
    while (2 * n <= q.max_nodes) {
        n *= 2;
        ScaledSums cur = integrate(p, b, count, n, q);
        diff = 0.0;
        for (int k = 0; k < count; ++k) {
            const double a = prev.sums[k] * std::exp(prev.ref - cur.ref);
            diff = std::max(diff, std::abs(cur.sums[k] - a) / cur.sums[k]);
        }
        if (diff <= q.rel_tol) {
            for (int k = 0; k < count; ++k) out[k] = cur.ref + std::log(cur.sums[k]);
            return;
        }
        prev = cur;
    }
    throw NumericalError("moment quadrature did not converge (p=" + std::to_string(p) + ", b=" +
                             std::to_string(b) + ")",
                         diff);
}

double log_cylinder_d(double alpha, double x, const QuadratureSettings& q) {
    if (!(alpha < 0.0)) throw DomainError("cylinder_d requires alpha < 0");
    double m;
    log_moments(-alpha, -x, std::span<double>(&m, 1), q);
    return -0.25 * x * x - std::lgamma(-alpha) + m;
}

double cylinder_d(double alpha, double x, const QuadratureSettings& q) {
    return std::exp(log_cylinder_d(alpha, x, q));
}

// ---------------------------------------------------------------------------

struct FundamentalSolution::Cache {
    std::mutex mutex;
    std::unordered_map<std::uint64_t, Seed> entries;
};

FundamentalSolution::FundamentalSolution(const ModelParams& params, QuadratureSettings quad, CachePolicy cache)
    : params_(params),
      quad_(quad),
      cache_policy_(cache),
      nu_(params.rho / params.kappa),
      a_(std::sqrt(2.0 * params.kappa) / params.sigma),
      log_gamma_nu_(std::lgamma(params.rho / params.kappa)),
      cache_(std::make_shared<Cache>()) {}

FundamentalSolution::Seed FundamentalSolution::compute_seed(double x) const {
    std::array<double, 2> m{};
    log_moments(nu_, a_ * (x - params_.mu), m, quad_);
    return Seed{m[0] - log_gamma_nu_, a_ * std::exp(m[1] - m[0])};
}

FundamentalSolution::Seed FundamentalSolution::seed(double x) const {
    if (!std::isfinite(x)) throw DomainError("fundamental solution evaluated at non-finite x");
    if (!cache_policy_.enabled) return compute_seed(x);
    const auto key = std::bit_cast<std::uint64_t>(x);
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->entries.find(key); it != cache_->entries.end()) return it->second;
    }
    const Seed s = compute_seed(x);
    std::lock_guard lock(cache_->mutex);
    if (cache_->entries.size() >= cache_policy_.max_entries) cache_->entries.clear();
    cache_->entries.emplace(key, s);
    return s;
}

std::size_t FundamentalSolution::cache_size() const {
    std::lock_guard lock(cache_->mutex);
    return cache_->entries.size();
}

double FundamentalSolution::log_psi(double x) const { return seed(x).log_psi; }

double FundamentalSolution::log_phi(double x) const {
    double m;
    log_moments(nu_, -a_ * (x - params_.mu), std::span<double>(&m, 1), quad_);
    return m - log_gamma_nu_;
}

namespace {
double checked_exp(double v, const char* what, double x) {
    const double r = std::exp(v);
    if (!std::isfinite(r) || r == 0.0) {
        throw NumericalError(std::string(what) + " not representable at x=" + std::to_string(x) +
                                 "; use the log-space accessor",
                             0.0);
    }
    return r;
}
}  // namespace

double FundamentalSolution::psi(double x) const { return checked_exp(log_psi(x), "psi", x); }

double FundamentalSolution::phi(double x) const { return checked_exp(log_phi(x), "phi", x); }

std::vector<double> FundamentalSolution::deriv_ratios(int kmax, double x) const {
    if (kmax < 0) throw DomainError("derivative order must be non-negative");
    std::vector<double> r(static_cast<std::size_t>(kmax) + 1);
    r[0] = 1.0;
    if (kmax == 0) return r;
    r[1] = seed(x).r1;
    const double s2 = params_.sigma * params_.sigma;
    const double drift = -2.0 * params_.kappa * (params_.mu - x) / s2;
    for (int k = 0; k + 2 <= kmax; ++k) {
        r[k + 2] = drift * r[k + 1] + 2.0 * (params_.rho + k * params_.kappa) / s2 * r[k];
        if (!(r[k + 2] > 0.0)) {
            throw NumericalError("psi derivative recurrence lost positivity at k=" + std::to_string(k + 2) +
                                     ", x=" + std::to_string(x),
                                 std::abs(r[k + 2]));
        }
    }
    return r;
}

double FundamentalSolution::psi_deriv(int k, double x) const {
    const auto r = deriv_ratios(k, x);
    return psi(x) * r[static_cast<std::size_t>(k)];
}

double FundamentalSolution::psi_moment(int k, double x) const {
    if (k < 0 || k >= kMaxMoments) throw DomainError("psi_moment supports k in [0, 7]");
    std::array<double, kMaxMoments> m{};
    log_moments(nu_, a_ * (x - params_.mu), std::span<double>(m.data(), k + 1), quad_);
    return checked_exp(k * std::log(a_) + m[k] - log_gamma_nu_, "psi moment", x);
}

double FundamentalSolution::phi_moment(int k, double x) const {
    if (k < 0 || k >= kMaxMoments) throw DomainError("phi_moment supports k in [0, 7]");
    std::array<double, kMaxMoments> m{};
    log_moments(nu_, -a_ * (x - params_.mu), std::span<double>(m.data(), k + 1), quad_);
    const double mag = checked_exp(k * std::log(a_) + m[k] - log_gamma_nu_, "phi moment", x);
    return (k % 2 == 0) ? mag : -mag;
}

double FundamentalSolution::q_k(int k, double x) const {
    const auto r = deriv_ratios(k + 2, x);
    const double p = psi(x);
    return p * p * (r[k] * r[k + 2] - r[k + 1] * r[k + 1]);
}

double FundamentalSolution::psi_ratio_index(int k, double x) const {
    const auto r = deriv_ratios(k + 2, x);
    return r[k + 1] * r[k + 1] / (r[k] * r[k + 2]);
}

}  // namespace solarinv
