#include "xustat/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace xu::dist {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
  return mix64(parent ^ mix64(id * kStreamSalt + kGolden));
}

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void require_prob(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(Errc::ArgumentOutOfRange, "probability must lie in (0, 1)");
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : master_seed_(master_seed),
      stream_id_(stream_id),
      key_(derive_key(mix64(master_seed), stream_id)) {}

RngStream::result_type RngStream::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0, never 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::substream(std::uint64_t id) const noexcept {
  return RngStream(master_seed_, mix64(stream_id_) ^ id, derive_key(key_, id));
}

std::string DistributionSpec::label() const {
  switch (family) {
    case Family::GP: return "GP(" + fmt_num(p1) + ")";
    case Family::Pareto1: return "Pareto1";
    case Family::StudentT: return "StudentT(" + fmt_num(p1) + ")";
    case Family::Normal: return "Normal";
    case Family::Beta: return "Beta(" + fmt_num(p1) + ";" + fmt_num(p2) + ")";
    case Family::Frechet: return "Frechet(" + fmt_num(p1) + ")";
    case Family::Burr: return "Burr(" + fmt_num(p1) + ";" + fmt_num(p2) + ")";
    case Family::Exponential: return "Exponential";
  }
  return "Unknown";
}

DistributionSpec gp(double gamma) {
  if (!std::isfinite(gamma)) throw Error(Errc::ArgumentOutOfRange, "GP gamma must be finite");
  return {Family::GP, gamma, 0.0, gamma, std::nullopt};
}

DistributionSpec pareto1() { return {Family::Pareto1, 0.0, 0.0, 1.0, std::nullopt}; }

DistributionSpec student_t(double nu) {
  if (!(nu > 0.0)) throw Error(Errc::ArgumentOutOfRange, "Student-t needs nu > 0");
  return {Family::StudentT, nu, 0.0, 1.0 / nu, -2.0 / nu};
}

DistributionSpec normal() { return {Family::Normal, 0.0, 0.0, 0.0, 0.0}; }

DistributionSpec beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw Error(Errc::ArgumentOutOfRange, "Beta needs a, b > 0");
  // Right endpoint at 1 with (1 - x)^(b-1) density behaviour: gamma = -1/b.
  return {Family::Beta, a, b, -1.0 / b, std::nullopt};
}

DistributionSpec frechet(double alpha) {
  if (!(alpha > 0.0)) throw Error(Errc::ArgumentOutOfRange, "Frechet needs alpha > 0");
  return {Family::Frechet, alpha, 0.0, 1.0 / alpha, -1.0};
}

DistributionSpec burr(double lambda, double eta) {
  if (!(lambda > 0.0 && eta > 0.0)) {
    throw Error(Errc::ArgumentOutOfRange, "Burr needs lambda, eta > 0");
  }
  return {Family::Burr, lambda, eta, 1.0 / (lambda * eta), -1.0 / lambda};
}

DistributionSpec exponential() { return {Family::Exponential, 0.0, 0.0, 0.0, std::nullopt}; }

DistributionSpec burr_from_gamma_rho(double gamma, double rho) {
  if (!(gamma > 0.0) || !(rho < 0.0)) {
    throw Error(Errc::ArgumentOutOfRange, "Burr mapping needs gamma > 0 and rho < 0");
  }
  const double lambda = -1.0 / rho;
  return burr(lambda, 1.0 / (gamma * lambda));
}

std::optional<Family> parse_family(const std::string& name) {
  if (name == "GP") return Family::GP;
  if (name == "Pareto1") return Family::Pareto1;
  if (name == "StudentT") return Family::StudentT;
  if (name == "Normal") return Family::Normal;
  if (name == "Beta") return Family::Beta;
  if (name == "Frechet") return Family::Frechet;
  if (name == "Burr") return Family::Burr;
  if (name == "Exponential") return Family::Exponential;
  return std::nullopt;
}

DistributionSpec make_spec(Family family, const std::vector<double>& params) {
  auto need = [&](std::size_t count) {
    if (params.size() != count) {
      throw Error(Errc::ArgumentOutOfRange,
                  "family expects " + std::to_string(count) + " parameter(s)");
    }
  };
  switch (family) {
    case Family::GP: need(1); return gp(params[0]);
    case Family::Pareto1: need(0); return pareto1();
    case Family::StudentT: need(1); return student_t(params[0]);
    case Family::Normal: need(0); return normal();
    case Family::Beta: need(2); return beta(params[0], params[1]);
    case Family::Frechet: need(1); return frechet(params[0]);
    case Family::Burr: need(2); return burr(params[0], params[1]);
    case Family::Exponential: need(0); return exponential();
  }
  throw Error(Errc::ArgumentOutOfRange, "unknown family");
}

double h_gamma_log(double gamma, double log_y) noexcept {
  if (std::fabs(gamma) < 1e-8) {
    const double gl = gamma * log_y;
    return log_y * (1.0 + gl * (0.5 + gl / 6.0));
  }
  return std::expm1(gamma * log_y) / gamma;
}

double h_gamma(double gamma, double y) {
  if (!(y > 0.0)) throw Error(Errc::NonPositiveArgument, "h_gamma needs y > 0");
  return h_gamma_log(gamma, std::log(y));
}

double gp_quantile(double gamma, double u) {
  require_prob(u);
  // ln(1 / (1 - u)) = -log1p(-u)
  return h_gamma_log(gamma, -std::log1p(-u));
}

bool has_closed_form_quantile(const DistributionSpec& spec) noexcept {
  switch (spec.family) {
    case Family::GP:
    case Family::Pareto1:
    case Family::Frechet:
    case Family::Burr:
    case Family::Exponential:
      return true;
    default:
      return false;
  }
}

double quantile(const DistributionSpec& spec, double u) {
  require_prob(u);
  switch (spec.family) {
    case Family::GP: return gp_quantile(spec.p1, u);
    case Family::Pareto1: return std::exp(-std::log1p(-u));
    case Family::Exponential: return -std::log1p(-u);
    case Family::Frechet: return std::pow(-std::log(u), -1.0 / spec.p1);
    case Family::Burr: {
      // F(x) = 1 - (1 + x^eta)^(-lambda)
      const double base = std::expm1(-std::log1p(-u) / spec.p1);
      return std::pow(base, 1.0 / spec.p2);
    }
    default:
      throw Error(Errc::ArgumentOutOfRange, spec.label() + " has no closed-form quantile");
  }
}

std::vector<double> draw(const DistributionSpec& spec, std::size_t n, RngStream& rng) {
  std::vector<double> out(n);
  switch (spec.family) {
    case Family::Normal: {
      std::normal_distribution<double> nd(0.0, 1.0);
      for (auto& x : out) x = nd(rng);
      break;
    }
    case Family::StudentT: {
      std::normal_distribution<double> nd(0.0, 1.0);
      std::chi_squared_distribution<double> chi(spec.p1);
      for (auto& x : out) {
        const double z = nd(rng);
        x = z / std::sqrt(chi(rng) / spec.p1);
      }
      break;
    }
    case Family::Beta: {
      std::gamma_distribution<double> ga(spec.p1, 1.0);
      std::gamma_distribution<double> gb(spec.p2, 1.0);
      for (auto& x : out) {
        const double a = ga(rng);
        const double b = gb(rng);
        x = a / (a + b);
      }
      break;
    }
    default:
      for (auto& x : out) x = quantile(spec, rng.uniform());
      break;
  }
  return out;
}

SortedSample sample(const DistributionSpec& spec, std::size_t n, RngStream& rng) {
  if (n < 3) throw Error(Errc::TooFewObservations, "sample size must be at least 3");
  const auto raw = draw(spec, n, rng);
  return sort_sample(raw);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::ArgumentOutOfRange, "KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

OrderStatCheck gp_order_stat_check(double gamma, std::size_t m, std::size_t q,
                                   std::size_t reps, RngStream& rng) {
  if (q < 1 || q > m || reps < 1) {
    throw Error(Errc::ArgumentOutOfRange, "order-statistic check needs 1 <= q <= m and reps >= 1");
  }
  std::vector<std::vector<double>> direct(q), represented(q);
  for (auto& v : direct) v.reserve(reps);
  for (auto& v : represented) v.reserve(reps);

  std::vector<double> block(m);
  std::vector<double> small(q - 1);
  auto top_q = [&](RngStream& s) {
    for (auto& x : block) x = gp_quantile(gamma, s.uniform());
    std::partial_sort(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(q), block.end(),
                      std::greater<>());
  };

  for (std::size_t r = 0; r < reps; ++r) {
    top_q(rng);
    for (std::size_t i = 0; i < q; ++i) direct[i].push_back(block[i]);

    // Independent q-th largest of m draws, then q-1 fresh GP draws.
    top_q(rng);
    const double threshold = block[q - 1];
    for (auto& x : small) x = gp_quantile(gamma, rng.uniform());
    std::sort(small.begin(), small.end(), std::greater<>());
    for (std::size_t i = 0; i < q; ++i) {
      const double z = i + 1 < q ? small[i] : 0.0;  // Z_{0:q-1} = 0
      represented[i].push_back(threshold + (1.0 + gamma * threshold) * z);
    }
  }

  OrderStatCheck out;
  for (std::size_t i = 0; i < q; ++i) {
    out.margin_distance.push_back(two_sample_ks(direct[i], represented[i]));
    out.ks_distance = std::max(out.ks_distance, out.margin_distance.back());
  }
  return out;
}

}  // namespace xu::dist
