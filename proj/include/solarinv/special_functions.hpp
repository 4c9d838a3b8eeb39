#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "solarinv/model.hpp"

namespace solarinv {

/// Settings for the moment integrals behind D_alpha, psi and phi.
///
/// The integral over [0, 1] is mapped with t = u^m so the t^(p-1) endpoint
/// singularity becomes smooth; [1, T] is covered by Gauss-Legendre panels.
/// The node count per panel doubles until two successive estimates agree.
struct QuadratureSettings {
    int initial_nodes = 16;
    int max_nodes = 512;
    double rel_tol = 1e-13;
    double panel_width = 2.0;
    /// Distance past the Gaussian peak max(b, 0) where integration stops.
    double tail_margin = 10.0;
};

/// log of  M_k(p, b) = int_0^inf t^(p+k-1) exp(-t^2/2 + b t) dt  for k = 0 .. out.size()-1.
/// Requires p > 0. Throws NumericalError when the node doubling does not converge.
void log_moments(double p, double b, std::span<double> out, const QuadratureSettings& q = {});

/// Parabolic cylinder function D_alpha(x) for alpha < 0 from its integral representation.
double cylinder_d(double alpha, double x, const QuadratureSettings& q = {});
double log_cylinder_d(double alpha, double x, const QuadratureSettings& q = {});

struct CachePolicy {
    bool enabled = true;
    std::size_t max_entries = std::size_t{1} << 16;
};

/// Fundamental solutions psi (increasing) and phi (decreasing) of
/// (1/2) sigma^2 u'' + kappa (mu - x) u' - rho u = 0.
///
/// With nu = rho/kappa and a = sqrt(2 kappa)/sigma,
///   psi^(k)(x) = a^k / Gamma(nu) * M_k(nu, a (x - mu)),
/// which is the D_{-nu} representation with the Gaussian prefactor cancelled.
/// psi and psi' come from quadrature; higher derivatives use the recurrence
///   psi^(k+2) = -(2 kappa/sigma^2)(mu - x) psi^(k+1) + (2 (rho + k kappa)/sigma^2) psi^(k).
///
/// Instances are safe for concurrent use; the memo cache is mutex-guarded.
class FundamentalSolution {
public:
    explicit FundamentalSolution(const ModelParams& params, QuadratureSettings quad = {},
                                 CachePolicy cache = {});

    const ModelParams& params() const noexcept { return params_; }
    const QuadratureSettings& quadrature() const noexcept { return quad_; }
    double nu() const noexcept { return nu_; }
    double scale() const noexcept { return a_; }

    double log_psi(double x) const;
    double log_phi(double x) const;
    double psi(double x) const;
    double phi(double x) const;

    /// k-th derivative of psi. k = 0, 1 by quadrature, k >= 2 by recurrence.
    /// Throws NumericalError if the recurrence produces a non-positive value.
    double psi_deriv(int k, double x) const;

    /// psi^(k)(x) / psi(x) for k = 0..kmax (same routes as psi_deriv).
    std::vector<double> deriv_ratios(int kmax, double x) const;

    /// psi^(k) straight from the k-th moment integral, independent of the recurrence.
    double psi_moment(int k, double x) const;
    /// phi^(k) straight from its moment integral.
    double phi_moment(int k, double x) const;

    /// Q_k = psi^(k) psi^(k+2) - (psi^(k+1))^2.
    double q_k(int k, double x) const;
    /// Psi_k = (psi^(k+1))^2 / (psi^(k) psi^(k+2)); strictly increasing in x.
    double psi_ratio_index(int k, double x) const;

    std::size_t cache_size() const;

private:
    struct Seed {
        double log_psi;
        double r1;  // psi'/psi
    };
    struct Cache;

    Seed seed(double x) const;
    Seed compute_seed(double x) const;

    ModelParams params_;
    QuadratureSettings quad_;
    CachePolicy cache_policy_;
    double nu_;
    double a_;
    double log_gamma_nu_;
    std::shared_ptr<Cache> cache_;
};

}  // namespace solarinv
