#include "xustat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xustat/ustat.hpp"

namespace xu::est {

namespace {

constexpr std::size_t kGridHalf = 200;
constexpr std::size_t kMaxRefineIterations = 200;
constexpr double kInvPhi = 0.6180339887498949;

double mean_log1p(std::span<const double> y, double tau) {
  CompensatedSum s;
  for (double v : y) s += std::log1p(tau * v);
  return s.value() / static_cast<double>(y.size());
}

double mean_of(std::span<const double> y) {
  CompensatedSum s;
  for (double v : y) s += v;
  return s.value() / static_cast<double>(y.size());
}

// tau at which mean ln(1 + tau y) = -1, i.e. the gamma = -1 edge.
double lower_tau(std::span<const double> y) {
  double lo = -1.0, hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_log1p(y, mid) > -1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

std::vector<double> excesses_over_threshold(const SortedSample& sample, std::size_t k) {
  if (k < 1 || k + 1 > sample.n()) {
    throw Error(Errc::ThresholdOutOfRange,
                "need 1 <= k <= n - 1, got k=" + std::to_string(k));
  }
  const double threshold = sample[k];
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = sample[i] - threshold;
  return out;
}

double gp_profile_loglik(std::span<const double> y, double tau) {
  if (tau == 0.0) return -std::log(mean_of(y));
  const double gamma = mean_log1p(y, tau);
  return -std::log(gamma / tau) - gamma;
}

GpMlFit gp_ml_fit(std::span<const double> x) {
  if (x.size() < 5) {
    throw Error(Errc::ArgumentOutOfRange, "GP ML fit needs at least 5 excesses");
  }
  double xmax = 0.0, xmin = std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(Errc::ArgumentOutOfRange, "excesses must be finite and non-negative");
    }
    xmax = std::max(xmax, v);
    xmin = std::min(xmin, v);
  }
  if (!(xmax > xmin)) {
    throw Error(Errc::DegenerateSpacing, "all excesses are equal; the likelihood has no interior maximum");
  }

  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [xmax](double v) { return v / xmax; });

  // Grid over the feasible tau interval: the negative side approaches the
  // gamma = -1 edge geometrically, the positive side spans 16 decades.
  const double tau_edge = lower_tau(y);
  std::vector<double> grid;
  grid.reserve(2 * kGridHalf + 1);
  for (std::size_t i = 0; i < kGridHalf; ++i) {
    const double a = 1e-12 + 8.0 * static_cast<double>(i) / static_cast<double>(kGridHalf - 1);
    grid.push_back(tau_edge * std::pow(10.0, -a));
  }
  grid.push_back(0.0);
  for (std::size_t i = 0; i < kGridHalf; ++i) {
    const double a = -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(kGridHalf - 1);
    grid.push_back(std::pow(10.0, a));
  }

  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = gp_profile_loglik(y, grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  // Golden-section refinement between the neighbours of the best grid point.
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = gp_profile_loglik(y, c);
  double fd = gp_profile_loglik(y, d);
  GpMlFit fit;
  bool converged = false;
  std::size_t it = 0;
  for (; it < kMaxRefineIterations; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a < 1e-12 * (1.0 + std::fabs(mid))) {
      converged = true;
      break;
    }
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = gp_profile_loglik(y, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = gp_profile_loglik(y, d);
    }
  }
  double tau = 0.5 * (a + b);
  double val = gp_profile_loglik(y, tau);
  if (best_val > val) {  // keep the grid point if refinement did not improve on it
    tau = grid[best];
    val = best_val;
  }

  const double kd = static_cast<double>(x.size());
  if (tau == 0.0) {
    fit.gamma_hat = 0.0;
    fit.sigma_hat = xmax * mean_of(y);
  } else {
    fit.gamma_hat = mean_log1p(y, tau);
    fit.sigma_hat = xmax * fit.gamma_hat / tau;
  }
  fit.loglik = -kd * std::log(fit.sigma_hat) - kd - kd * fit.gamma_hat;
  fit.converged = converged;
  fit.iterations = it;
  return fit;
}

std::size_t paired_threshold_count(std::size_t n, std::size_t m) noexcept {
  return m == 0 ? 0 : (3 * n) / m;
}

std::vector<EstimateRecord> pickands_trajectory(const SortedSample& sample,
                                                std::span<const std::size_t> m_grid) {
  const std::size_t n = sample.n();
  std::size_t m_min = n;
  for (std::size_t m : m_grid) {
    if (m >= 3 && m <= n) m_min = std::min(m_min, m);
  }
  const ustat::LogSpacingTable table(sample, n - m_min + 3);

  std::vector<EstimateRecord> out;
  out.reserve(m_grid.size());
  for (std::size_t m : m_grid) {
    EstimateRecord rec;
    rec.estimator = Estimator::ExtremePickands;
    rec.m_or_k = m;
    try {
      if (m < 3 || m > n) throw Error(Errc::BlockSizeOutOfRange, "m outside [3, n]");
      rec.gamma_hat = table.estimate(m);
    } catch (const Error& e) {
      rec.failure = e.code();
      rec.gamma_hat = std::nan("");
    }
    out.push_back(rec);
  }
  return out;
}

EstimateRecord gp_ml_record(const SortedSample& sample, std::size_t k) {
  EstimateRecord rec;
  rec.estimator = Estimator::GpMl;
  rec.m_or_k = k;
  try {
    const auto ex = excesses_over_threshold(sample, k);
    const GpMlFit fit = gp_ml_fit(ex);
    rec.gamma_hat = fit.gamma_hat;
    rec.converged = fit.converged;
  } catch (const Error& e) {
    rec.failure = e.code();
    rec.gamma_hat = std::nan("");
  }
  return rec;
}

std::pair<EstimateRecord, EstimateRecord> paired_comparison(const SortedSample& sample,
                                                            std::size_t m) {
  const std::size_t n = sample.n();
  if (m < 3 || m > n) throw Error(Errc::BlockSizeOutOfRange, "m outside [3, n]");
  const std::size_t k_nominal = paired_threshold_count(n, m);
  if (k_nominal < 5) {
    throw Error(Errc::ThresholdOutOfRange, "floor(3n/m) = " + std::to_string(k_nominal) + " < 5");
  }
  // At m = 3 the nominal count is n; excesses need a threshold, so the fit
  // uses the n - 1 excesses over the sample minimum.
  const std::size_t k = std::min(k_nominal, n - 1);

  EstimateRecord pick;
  pick.estimator = Estimator::ExtremePickands;
  pick.m_or_k = m;
  pick.gamma_hat = ustat::pickands_ustat(sample, m);
  return {pick, gp_ml_record(sample, k)};
}

}  // namespace xu::est
