#pragma once

// Evaluation engines for extreme U-statistics.
//
//  * brute_force_ustat     - averages the kernel over all C(n, m) blocks (oracle).
//  * topq_weighted_ustat   - sums over rank tuples of the top-q order statistics,
//                            weighting each tuple by the probability that a random
//                            m-block has exactly those ranks on top.
//  * pickands_ustat        - O(n^2) closed form for the Pickands kernel as a
//                            weighted sum of log-spacings.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "xustat/core.hpp"

namespace xu::ustat {

/// Coefficients of the log-spacing representation of the U-Pickands estimator.
/// For j = 2 .. n - m + 3 (1-based rank of the subtrahend):
///   w_j = C(n-j, m-3) / C(n, m) * (2 (n - j + 1) / (m - 2) - j).
struct PickandsWeights {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> w;          // w[j - 2]
  std::vector<double> log_ratio;  // ln(C(n-j, m-3) / C(n, m)), same indexing

  std::size_t j_max() const noexcept { return n - m + 3; }
  double weight(std::size_t j) const { return w.at(j - 2); }
};

struct OverlapPmf {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> p;  // p[l], l = 0..m

  double mean() const noexcept;
  double total() const noexcept;
};

constexpr std::size_t kBruteForceMaxN = 20;
constexpr std::size_t kTopQDefaultMaxN = 2000;

double brute_force_ustat(const SortedSample& sample, std::size_t m, const TopQKernel& kernel);

double topq_weighted_ustat(const SortedSample& sample, std::size_t m, const TopQKernel& kernel,
                           std::size_t max_n = kTopQDefaultMaxN);

/// C(n - r, m - q) / C(n, m): probability that a uniformly chosen m-block has
/// its q-th largest element at sample rank r, given it contains a fixed set of
/// q elements ending at rank r.
double topq_tuple_weight(std::size_t n, std::size_t m, std::size_t q, std::size_t last_rank);

double log_binomial(std::size_t n, std::size_t k) noexcept;

PickandsWeights pickands_weights(std::size_t n, std::size_t m);

/// S_j = sum_{i < j} ln(X_(i) - X_(j)) for a descending sample (1-based j >= 2).
/// Throws DegenerateSpacing when X_(j-1) - X_(j) is zero or subnormal.
double log_spacing_sum(std::span<const double> descending, std::size_t j);

/// The log-spacing sums S_2..S_J of one sample, reusable across block sizes.
/// Entries whose adjacent spacing is degenerate are recorded, not thrown,
/// so a single tie only invalidates the block sizes whose weights reach it.
class LogSpacingTable {
 public:
  LogSpacingTable(const SortedSample& sample, std::size_t j_max);

  std::size_t n() const noexcept { return n_; }
  std::size_t j_max() const noexcept { return j_max_; }
  /// Exact U-Pickands estimate at block size m; m must satisfy n - m + 3 <= j_max().
  double estimate(std::size_t m) const;
  double estimate(const PickandsWeights& weights) const;

 private:
  std::size_t n_;
  std::size_t j_max_;
  std::vector<double> sums_;        // sums_[j - 2]
  std::vector<std::size_t> degenerate_;  // 1-based j with a zero spacing
};

double pickands_ustat(const SortedSample& sample, std::size_t m);

struct TruncatedEstimate {
  double value = 0.0;
  double error_bound = 0.0;  // |exact - value| <= error_bound
  std::size_t terms_used = 0;
  std::size_t terms_total = 0;
};

/// Skips trailing j-terms once their worst-case contribution, bounded through
/// the sample range and smallest adjacent spacing, falls below
/// `relative_tolerance` times the accumulated magnitude.
TruncatedEstimate pickands_ustat_truncated(const SortedSample& sample, std::size_t m,
                                           double relative_tolerance);

/// Average of K_P over floor(n/m) disjoint consecutive blocks of the raw
/// (unsorted) observations.
double disjoint_block_pickands(std::span<const double> raw, std::size_t m);

OverlapPmf overlap_pmf(std::size_t n, std::size_t m);

}  // namespace xu::ustat
