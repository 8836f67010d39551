#pragma once

// Asymptotic variance and bias constants of the extreme U-Pickands estimator,
// the parametric bootstrap, and closed-form GP log-moments.

#include <cstddef>
#include <vector>

#include "xustat/core.hpp"
#include "xustat/dist.hpp"

namespace xu::asym {

enum class VarianceMethod { KVarMc, IntegralMc };

struct VarianceEstimate {
  double gamma = 0.0;
  double sigma2 = 0.0;
  std::size_t reps = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double stderr_ = 0.0;
  VarianceMethod method = VarianceMethod::KVarMc;
  // KVarMc only: mean of the replicated estimates and failed replications.
  double mean_estimate = 0.0;
  std::size_t failures = 0;
};

struct BiasEstimate {
  double gamma = 0.0;
  double rho = 0.0;
  double b_k = 0.0;
  double stderr_ = 0.0;
  std::size_t reps = 0;
};

/// Second-order limit function: the double integral
/// int_1^x s^(gamma-1) int_1^s u^(rho-1) du ds for x >= 1, rho <= 0.
double h_gamma_rho(double x, double gamma, double rho);

/// E[S_q^(-rho)] for S_q ~ Erlang(q): Gamma(q - rho) / Gamma(q).
double erlang_neg_rho_moment(double rho, std::size_t q);

/// Monte Carlo estimate of the asymptotic bias constant B_K(rho, gamma) for
/// the Pickands kernel (q = 3).
BiasEstimate bias_bk_mc(double gamma, double rho, std::size_t reps, dist::RngStream& rng);

/// k * sample variance of the U-Pickands estimator over `reps` GP(gamma)
/// samples of size n, k = n / m.
VarianceEstimate sigma2_kvar_mc(double gamma, std::size_t n, std::size_t m, std::size_t reps,
                                const dist::RngStream& rng, std::size_t threads = 0);

/// k * sample variance of a set of replicated estimates plus the delta-method
/// standard error of a sample variance.
VarianceEstimate sigma2_from_estimates(const std::vector<double>& estimates, double k);

struct IntegralOptions {
  std::size_t inner_reps = 200000;
  std::size_t quad_nodes = 128;
  std::size_t groups = 32;  // jackknife groups for the standard error
  std::size_t threads = 0;
};

/// Direct evaluation of the variance integral over (0, inf) after the
/// substitution x = t / (1 - t), Gauss-Legendre in t, with common random
/// numbers across nodes.
VarianceEstimate sigma2_integral_mc(double gamma, const IntegralOptions& options,
                                    const dist::RngStream& rng);

struct GaussLegendre {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t count);

struct BootstrapResult {
  EstimateRecord record;  // with std_error and CI
  std::size_t dropped = 0;
  std::vector<double> replicates;
};

/// Parametric bootstrap with GP(gamma_hat) samples and a normal-approximation
/// interval gamma_hat +- z sd.
BootstrapResult bootstrap_ci(const SortedSample& sample, std::size_t m, std::size_t boot_reps,
                             double level, const dist::RngStream& rng, std::size_t threads = 1);

struct DigammaMoments {
  double e_ln_z = 0.0;     // E ln Z_1
  double e_ln_z22 = 0.0;   // E ln Z_{2:2}
  double e_ln_z12 = 0.0;   // E ln Z_{1:2}
  double u1 = 0.0;         // E ln((Z_{2:2} - Z_{1:2}) / Z_{1:2})
  double u2 = 0.0;         // E ln(Z_{2:2} / Z_{1:2})
  double kernel_mean = 0.0;  // 2 u1 - u2
};

DigammaMoments digamma_moments(double gamma);

double normal_quantile(double p);

}  // namespace xu::asym
