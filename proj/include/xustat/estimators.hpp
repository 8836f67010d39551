#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "xustat/core.hpp"

namespace xu::est {

struct GpMlFit {
  double gamma_hat = 0.0;  // > -1
  double sigma_hat = 0.0;  // > 0
  double loglik = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// X_(i) - X_(k+1) for i = 1..k. Ties give zero excesses; the fit rejects them.
std::vector<double> excesses_over_threshold(const SortedSample& sample, std::size_t k);

/// Maximum-likelihood GP fit to threshold excesses via the profile likelihood
/// in theta = gamma / sigma. The search variable is tau = theta * max(x), so
/// the fit is exactly scale equivariant.
GpMlFit gp_ml_fit(std::span<const double> excesses);

/// Profile log-likelihood per observation at tau (up to the -ln max(x) - 1 constant).
double gp_profile_loglik(std::span<const double> scaled_excesses, double tau);

/// k = floor(3n / m), the GP ML tail count paired with block size m.
std::size_t paired_threshold_count(std::size_t n, std::size_t m) noexcept;

std::vector<EstimateRecord> pickands_trajectory(const SortedSample& sample,
                                                std::span<const std::size_t> m_grid);

/// GP ML record at k exceedances; failures are recorded rather than thrown.
EstimateRecord gp_ml_record(const SortedSample& sample, std::size_t k);

std::pair<EstimateRecord, EstimateRecord> paired_comparison(const SortedSample& sample,
                                                            std::size_t m);

}  // namespace xu::est
