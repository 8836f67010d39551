#include "xustat/core.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace xu {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::DegenerateSpacing: return "DegenerateSpacing";
    case Errc::InstanceTooLarge: return "InstanceTooLarge";
    case Errc::BlockSizeOutOfRange: return "BlockSizeOutOfRange";
    case Errc::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case Errc::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case Errc::NonPositiveArgument: return "NonPositiveArgument";
  }
  return "Unknown";
}

const char* to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::ExtremePickands: return "ExtremePickands";
    case Estimator::GpMl: return "GpMl";
  }
  return "Unknown";
}

namespace {

void validate_values(std::span<const double> v) {
  if (v.size() < 3) {
    throw Error(Errc::TooFewObservations,
                "need at least 3 observations, got " + std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(Errc::NonFiniteInput, "sample contains a non-finite value");
  }
}

}  // namespace

SortedSample SortedSample::from_descending(std::vector<double> values) {
  validate_values(values);
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i - 1] < values[i]) {
      throw Error(Errc::ArgumentOutOfRange, "values are not in descending order");
    }
  }
  return SortedSample(std::move(values));
}

SortedSample SortedSample::affine(double a, double b) const {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(Errc::ArgumentOutOfRange, "affine map needs a > 0 and finite b");
  }
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [a, b](double x) { return a * x + b; });
  // a > 0 preserves order up to rounding, which can only create ties.
  return from_descending(std::move(out));
}

SortedSample sort_sample(std::span<const double> raw) {
  validate_values(raw);
  std::vector<double> v(raw.begin(), raw.end());
  std::stable_sort(v.begin(), v.end(), std::greater<>());
  return SortedSample::from_descending(std::move(v));
}

TopQKernel make_kernel(std::size_t q,
                       std::function<double(std::span<const double>)> eval) {
  if (q < 3) {
    throw Error(Errc::ArgumentOutOfRange,
                "a non-constant location-scale invariant kernel needs q >= 3");
  }
  TopQKernel k;
  k.q = q;
  k.eval = std::move(eval);
  return k;
}

double softplus(double t) noexcept {
  // ln(1 + e^t) without overflow for large t or loss for very negative t.
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double pickands_g(double t) noexcept { return 2.0 * t - softplus(t); }

double pickands_g_prime(double t) noexcept {
  // 2 - e^t / (e^t + 1)
  const double sigmoid = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                                  : std::exp(t) / (1.0 + std::exp(t));
  return 2.0 - sigmoid;
}

namespace {

void check_spacings(double d12, double d23) {
  if (!(d12 > 0.0) || !(d23 > 0.0) || !std::isfinite(d12) || !std::isfinite(d23)) {
    throw Error(Errc::DegenerateSpacing, "Pickands kernel needs y1 > y2 > y3 with finite spacings");
  }
}

}  // namespace

double pickands_kernel(double y1, double y2, double y3) {
  const double d12 = y1 - y2;
  const double d23 = y2 - y3;
  check_spacings(d12, d23);
  return pickands_g(std::log(d12) - std::log(d23));
}

void pickands_partials(double y1, double y2, double y3, std::span<double, 3> out) {
  const double d12 = y1 - y2;
  const double d23 = y2 - y3;
  check_spacings(d12, d23);
  const double gp = pickands_g_prime(std::log(d12) - std::log(d23));
  out[0] = gp / d12;
  out[2] = gp / d23;
  out[1] = -out[0] - out[2];
}

TopQKernel pickands_top_q_kernel() {
  TopQKernel k = make_kernel(3, [](std::span<const double> y) {
    return pickands_kernel(y[0], y[1], y[2]);
  });
  k.g_prime = pickands_g_prime;
  k.partials = [](std::span<const double> y, std::span<double> out) {
    pickands_partials(y[0], y[1], y[2], std::span<double, 3>(out.data(), 3));
  };
  return k;
}

std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // Lowest chunk wins so the surfaced error is thread-count independent
  // whenever a single index fails.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace xu
