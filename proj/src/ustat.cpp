#include "xustat/ustat.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

namespace xu::ustat {

namespace {

void require_block(std::size_t n, std::size_t m, std::size_t q) {
  if (m < q || m > n) {
    throw Error(Errc::BlockSizeOutOfRange, "block size m=" + std::to_string(m) +
                                                " must satisfy " + std::to_string(q) +
                                                " <= m <= n=" + std::to_string(n));
  }
}

// ln 2 split so that e * kLn2Hi is exact for |e| < 2^20.
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFULL;
constexpr std::uint64_t kHalfExponent = 0x3FE0000000000000ULL;  // exponent of [0.5, 1)

}  // namespace

double log_binomial(std::size_t n, std::size_t k) noexcept {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double brute_force_ustat(const SortedSample& sample, std::size_t m, const TopQKernel& kernel) {
  const std::size_t n = sample.n();
  if (n > kBruteForceMaxN) {
    throw Error(Errc::InstanceTooLarge, "brute force limited to n <= 20");
  }
  require_block(n, m, kernel.q);

  // Subsets as increasing index lists; in a descending sample the first q
  // indices of a subset are its top-q order statistics.
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::vector<double> top(kernel.q);
  CompensatedSum total;
  std::size_t count = 0;
  while (true) {
    for (std::size_t i = 0; i < kernel.q; ++i) top[i] = sample[idx[i]];
    total += kernel.eval(top);
    ++count;
    // next combination
    std::size_t pos = m;
    while (pos > 0 && idx[pos - 1] == n - m + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < m; ++i) idx[i] = idx[i - 1] + 1;
  }
  return total.value() / static_cast<double>(count);
}

double topq_tuple_weight(std::size_t n, std::size_t m, std::size_t q, std::size_t last_rank) {
  if (last_rank < q || last_rank > n || m < q || m > n) return 0.0;
  if (n - last_rank < m - q) return 0.0;
  return std::exp(log_binomial(n - last_rank, m - q) - log_binomial(n, m));
}

double topq_weighted_ustat(const SortedSample& sample, std::size_t m, const TopQKernel& kernel,
                           std::size_t max_n) {
  const std::size_t n = sample.n();
  const std::size_t q = kernel.q;
  if (n > max_n) {
    throw Error(Errc::InstanceTooLarge,
                "rank-tuple evaluation limited to n <= " + std::to_string(max_n));
  }
  require_block(n, m, q);

  // Last rank r ranges over q .. n - (m - q); weight depends only on r.
  const std::size_t r_max = n - (m - q);
  std::vector<double> weight(r_max + 1, 0.0);
  for (std::size_t r = q; r <= r_max; ++r) weight[r] = topq_tuple_weight(n, m, q, r);

  std::vector<std::size_t> idx(q);  // 0-based indices, increasing
  for (std::size_t i = 0; i < q; ++i) idx[i] = i;
  std::vector<double> top(q);
  CompensatedSum total;
  const std::size_t last_max = r_max - 1;  // 0-based bound for idx[q-1]
  while (true) {
    for (std::size_t i = 0; i < q; ++i) top[i] = sample[idx[i]];
    total += weight[idx[q - 1] + 1] * kernel.eval(top);
    // advance: positions i < q-1 are bounded by idx of the next position
    std::size_t pos = q;
    while (pos > 0) {
      const std::size_t bound = last_max - (q - pos);
      if (idx[pos - 1] < bound) break;
      --pos;
    }
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < q; ++i) idx[i] = idx[i - 1] + 1;
  }
  return total.value();
}

PickandsWeights pickands_weights(std::size_t n, std::size_t m) {
  require_block(n, m, 3);
  PickandsWeights out;
  out.n = n;
  out.m = m;
  const std::size_t count = n - m + 2;  // j = 2 .. n - m + 3
  out.w.resize(count);
  out.log_ratio.resize(count);

  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  // C(n-2, m-3) / C(n, m) = m (m-1) (m-2) / (n (n-1) (n-m+1))
  CompensatedSum log_ratio;
  log_ratio += std::log(md) + std::log(md - 1.0) + std::log(md - 2.0);
  log_ratio += -(std::log(nd) + std::log(nd - 1.0) + std::log(nd - md + 1.0));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + 2;
    const double jd = static_cast<double>(j);
    if (j >= 3) {
      // ratio_j = ratio_{j-1} (n - j - m + 4) / (n - j + 1)
      log_ratio += std::log(nd - jd - md + 4.0) - std::log(nd - jd + 1.0);
    }
    out.log_ratio[k] = log_ratio.value();
    const double factor = 2.0 * (nd - jd + 1.0) / (md - 2.0) - jd;
    out.w[k] = factor == 0.0 ? 0.0 : std::copysign(std::exp(out.log_ratio[k] + std::log(std::fabs(factor))), factor);
  }
  return out;
}

double log_spacing_sum(std::span<const double> x, std::size_t j) {
  // 1-based j: the subtrahend is x[j-1], the minuends x[0..j-2].
  const std::size_t jj = j - 1;
  const double xj = x[jj];
  // The smallest difference is the adjacent one since x is descending.
  if (!(x[jj - 1] - xj >= DBL_MIN)) {
    throw Error(Errc::DegenerateSpacing, "tie or underflowing spacing at rank " + std::to_string(j));
  }
  // ln of a product of mantissas in [0.5, 1) plus the summed binary exponents.
  // Chunks of 32 keep the product above 2^-32, far from underflow.
  CompensatedSum logs;
  std::int64_t exponent = 0;
  std::size_t i = 0;
  while (i < jj) {
    const std::size_t end = std::min(jj, i + 32);
    double p0 = 1.0, p1 = 1.0, p2 = 1.0, p3 = 1.0;
    std::int64_t e = 0;
    auto take = [&](std::size_t at, double& p) {
      const auto bits = std::bit_cast<std::uint64_t>(x[at] - xj);
      e += static_cast<std::int64_t>(bits >> 52) - 1022;
      p *= std::bit_cast<double>((bits & kMantissaMask) | kHalfExponent);
    };
    for (; i + 4 <= end; i += 4) {
      take(i, p0);
      take(i + 1, p1);
      take(i + 2, p2);
      take(i + 3, p3);
    }
    for (; i < end; ++i) take(i, p0);
    logs += std::log((p0 * p1) * (p2 * p3));
    exponent += e;
  }
  const double ed = static_cast<double>(exponent);
  logs += ed * kLn2Hi;
  logs += ed * kLn2Lo;
  return logs.value();
}

LogSpacingTable::LogSpacingTable(const SortedSample& sample, std::size_t j_max)
    : n_(sample.n()), j_max_(std::min(j_max, sample.n())) {
  if (j_max_ < 2) throw Error(Errc::ArgumentOutOfRange, "log-spacing table needs j_max >= 2");
  sums_.resize(j_max_ - 1);
  const auto x = sample.values();
  for (std::size_t j = 2; j <= j_max_; ++j) {
    try {
      sums_[j - 2] = log_spacing_sum(x, j);
    } catch (const Error&) {
      sums_[j - 2] = std::nan("");
      degenerate_.push_back(j);
    }
  }
}

double LogSpacingTable::estimate(const PickandsWeights& weights) const {
  if (weights.n != n_) throw Error(Errc::ArgumentOutOfRange, "weights built for another n");
  if (weights.j_max() > j_max_) {
    throw Error(Errc::BlockSizeOutOfRange, "table does not reach rank " + std::to_string(weights.j_max()));
  }
  for (std::size_t j : degenerate_) {
    if (j <= weights.j_max() && weights.weight(j) != 0.0) {
      throw Error(Errc::DegenerateSpacing, "tie at rank " + std::to_string(j));
    }
  }
  CompensatedSum total;
  for (std::size_t k = 0; k < weights.w.size(); ++k) {
    if (weights.w[k] != 0.0) total += weights.w[k] * sums_[k];
  }
  return total.value();
}

double LogSpacingTable::estimate(std::size_t m) const {
  return estimate(pickands_weights(n_, m));
}

double pickands_ustat(const SortedSample& sample, std::size_t m) {
  const PickandsWeights weights = pickands_weights(sample.n(), m);
  const auto x = sample.values();
  CompensatedSum total;
  for (std::size_t k = 0; k < weights.w.size(); ++k) {
    if (weights.w[k] == 0.0) continue;
    total += weights.w[k] * log_spacing_sum(x, k + 2);
  }
  return total.value();
}

TruncatedEstimate pickands_ustat_truncated(const SortedSample& sample, std::size_t m,
                                           double relative_tolerance) {
  if (!(relative_tolerance >= 0.0)) {
    throw Error(Errc::ArgumentOutOfRange, "truncation tolerance must be >= 0");
  }
  const PickandsWeights weights = pickands_weights(sample.n(), m);
  const auto x = sample.values();
  const std::size_t count = weights.w.size();

  // |ln(X_(i) - X_(j))| <= L for every pair, with L from the range and the
  // smallest adjacent spacing; hence |S_j| <= (j - 1) L.
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) min_gap = std::min(min_gap, x[i - 1] - x[i]);
  const double range = x.front() - x.back();
  const double bound_log =
      min_gap > 0.0 ? std::max(std::fabs(std::log(range)), std::fabs(std::log(min_gap)))
                    : std::numeric_limits<double>::infinity();

  std::vector<double> tail(count + 1, 0.0);  // tail[k] = sum_{k' >= k} |w| (j' - 1)
  for (std::size_t k = count; k-- > 0;) {
    tail[k] = tail[k + 1] + std::fabs(weights.w[k]) * static_cast<double>(k + 1);
  }

  TruncatedEstimate out;
  out.terms_total = count;
  CompensatedSum total;
  double magnitude = 0.0;
  std::size_t k = 0;
  for (; k < count; ++k) {
    if (weights.w[k] != 0.0) {
      const double term = weights.w[k] * log_spacing_sum(x, k + 2);
      total += term;
      magnitude += std::fabs(term);
    }
    const double remaining = bound_log * tail[k + 1];
    if (remaining <= relative_tolerance * magnitude) {
      ++k;
      out.error_bound = remaining;
      break;
    }
  }
  out.terms_used = k;
  out.value = total.value();
  return out;
}

double disjoint_block_pickands(std::span<const double> raw, std::size_t m) {
  if (m < 3 || m > raw.size()) {
    throw Error(Errc::BlockSizeOutOfRange, "disjoint blocks need 3 <= m <= n");
  }
  const std::size_t blocks = raw.size() / m;
  std::vector<double> block(m);
  CompensatedSum total;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(b * m), m, block.begin());
    std::partial_sort(block.begin(), block.begin() + 3, block.end(), std::greater<>());
    total += pickands_kernel(block[0], block[1], block[2]);
  }
  return total.value() / static_cast<double>(blocks);
}

double OverlapPmf::mean() const noexcept {
  CompensatedSum s;
  for (std::size_t l = 0; l < p.size(); ++l) s += static_cast<double>(l) * p[l];
  return s.value();
}

double OverlapPmf::total() const noexcept {
  CompensatedSum s;
  for (double v : p) s += v;
  return s.value();
}

OverlapPmf overlap_pmf(std::size_t n, std::size_t m) {
  if (m < 1 || m > n) throw Error(Errc::BlockSizeOutOfRange, "overlap pmf needs 1 <= m <= n");
  OverlapPmf out;
  out.n = n;
  out.m = m;
  out.p.assign(m + 1, 0.0);
  const double log_total = log_binomial(n, m);
  std::vector<double> logs(m + 1, -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l <= m; ++l) {
    if (m - l > n - m) continue;  // C(n - m, m - l) = 0
    logs[l] = log_binomial(m, l) + log_binomial(n - m, m - l) - log_total;
    peak = std::max(peak, logs[l]);
  }
  CompensatedSum norm;
  for (std::size_t l = 0; l <= m; ++l) {
    out.p[l] = std::exp(logs[l] - peak);
    norm += out.p[l];
  }
  const double z = norm.value();
  for (auto& v : out.p) v /= z;
  return out;
}

}  // namespace xu::ustat
