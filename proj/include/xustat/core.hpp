#pragma once

// Shared domain types for extreme U-statistics: sorted samples, top-q
// kernels, estimate records and the error type used across the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xu {

enum class Errc {
  TooFewObservations,
  NonFiniteInput,
  DegenerateSpacing,
  InstanceTooLarge,
  BlockSizeOutOfRange,
  ThresholdOutOfRange,
  ArgumentOutOfRange,
  NonPositiveArgument,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Observations in descending order: values()[0] is the sample maximum.
class SortedSample {
 public:
  /// Wraps values that are already in descending order. Validates order,
  /// finiteness and n >= 3.
  static SortedSample from_descending(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t n() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Affine image a*x + b (a > 0), kept in descending order.
  SortedSample affine(double a, double b) const;

 private:
  explicit SortedSample(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

SortedSample sort_sample(std::span<const double> raw);

struct Evi {
  double gamma = 0.0;
};

/// A symmetric, location-scale invariant kernel that only looks at the
/// top-q order statistics of a block. `eval` receives those q values in
/// strictly decreasing order.
struct TopQKernel {
  std::size_t q = 3;
  std::function<double(std::span<const double>)> eval;
  // Optional: derivative of the g-representation K = g(ln((y1-y2)/(y2-y3))).
  std::function<double(double)> g_prime;
  // Optional: first-order partials, written into the second argument.
  std::function<void(std::span<const double>, std::span<double>)> partials;
};

/// Builds a kernel, enforcing q >= 3.
TopQKernel make_kernel(std::size_t q,
                       std::function<double(std::span<const double>)> eval);

// Pickands kernel ln((y1-y2)^2 / ((y1-y3)(y2-y3))), evaluated through its
// g-representation so extreme spacing ratios neither overflow nor cancel.
double pickands_kernel(double y1, double y2, double y3);
double pickands_g(double t) noexcept;
double pickands_g_prime(double t) noexcept;
double softplus(double t) noexcept;

/// Partials (dK/dy1, dK/dy2, dK/dy3) of the Pickands kernel.
void pickands_partials(double y1, double y2, double y3, std::span<double, 3> out);

TopQKernel pickands_top_q_kernel();

enum class Estimator { ExtremePickands, GpMl };

const char* to_string(Estimator e) noexcept;

struct EstimateRecord {
  Estimator estimator = Estimator::ExtremePickands;
  std::size_t m_or_k = 0;
  double gamma_hat = std::nan("");
  std::optional<double> std_error;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  // Set when the estimate could not be formed (gamma_hat is NaN then).
  std::optional<Errc> failure;
  // False when an iterative fit stopped at its iteration cap.
  bool converged = true;

  bool ok() const noexcept { return !failure.has_value(); }
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Runs body(i) for i in [0, count) on `threads` workers using static
/// contiguous chunks. threads == 0 selects hardware concurrency. Callers
/// write results by index, so output never depends on the thread count.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

std::size_t resolve_threads(std::size_t requested) noexcept;

}  // namespace xu
