#pragma once

// Distribution catalog used by the simulation study: GP tail quantiles,
// inversion and exact samplers, and (gamma, rho) ground truth.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "xustat/core.hpp"

namespace xu::dist {

/// Counter-based 64-bit generator. The output at position c is a SplitMix64
/// finalizer applied to key + c * golden, where the key mixes
/// (master_seed, stream_id). Streams are addressable without any shared
/// state, so replication r always sees the same draws.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Independent child stream; children of distinct ids never overlap.
  RngStream substream(std::uint64_t id) const noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t key) noexcept
      : master_seed_(master_seed), stream_id_(stream_id), key_(key) {}

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

enum class Family { GP, Pareto1, StudentT, Normal, Beta, Frechet, Burr, Exponential };

struct DistributionSpec {
  Family family = Family::GP;
  double p1 = 0.0;  // GP: gamma; StudentT: nu; Beta: a; Frechet: alpha; Burr: lambda
  double p2 = 0.0;  // Beta: b; Burr: eta
  std::optional<double> true_gamma;
  std::optional<double> true_rho;

  std::string label() const;
};

DistributionSpec gp(double gamma);
DistributionSpec pareto1();
DistributionSpec student_t(double nu);
DistributionSpec normal();
DistributionSpec beta(double a, double b);
DistributionSpec frechet(double alpha);
DistributionSpec burr(double lambda, double eta);
DistributionSpec exponential();

/// Burr parameters with the requested gamma and rho < 0:
/// lambda = -1/rho, eta = 1/(gamma * lambda).
DistributionSpec burr_from_gamma_rho(double gamma, double rho);

/// Parses "GP", "Burr", ... (case-sensitive names as printed by label()).
std::optional<Family> parse_family(const std::string& name);
DistributionSpec make_spec(Family family, const std::vector<double>& params);

/// GP tail quantile function (y^gamma - 1)/gamma, ln y at gamma = 0.
double h_gamma(double gamma, double y);
/// Same function written in terms of log_y = ln y; valid for any real log_y.
double h_gamma_log(double gamma, double log_y) noexcept;

double gp_quantile(double gamma, double u);

bool has_closed_form_quantile(const DistributionSpec& spec) noexcept;
/// Quantile for inversion families; ArgumentOutOfRange otherwise.
double quantile(const DistributionSpec& spec, double u);

/// n i.i.d. draws in generation order.
std::vector<double> draw(const DistributionSpec& spec, std::size_t n, RngStream& rng);
SortedSample sample(const DistributionSpec& spec, std::size_t n, RngStream& rng);

struct OrderStatCheck {
  double ks_distance = 0.0;            // max over margins
  std::vector<double> margin_distance;  // one per top order statistic
};

/// Compares directly simulated top-q order statistics of m GP(gamma) draws
/// against the threshold representation Z*_{(q)} + (1 + gamma Z*_{(q)}) Z_{q-i:q-1}
/// with two-sample Kolmogorov-Smirnov distances per margin.
OrderStatCheck gp_order_stat_check(double gamma, std::size_t m, std::size_t q,
                                   std::size_t reps, RngStream& rng);

double two_sample_ks(std::vector<double> a, std::vector<double> b);

}  // namespace xu::dist
