#include "xustat/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "xustat/ustat.hpp"

namespace xu::asym {

namespace {

// I_k(z) = int_0^1 t^k e^{z t} dt, the k-th derivative of expm1(z)/z.
double exp_moment(int k, double z) {
  if (std::fabs(z) < 2.0) {
    double term = 1.0;  // z^n / n!
    double sum = 0.0;
    for (int n = 0; n < 80; ++n) {
      const double add = term / static_cast<double>(n + k + 1);
      sum += add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
      term *= z / static_cast<double>(n + 1);
    }
    return sum;
  }
  double value = std::expm1(z) / z;
  const double ez = std::exp(z);
  for (int j = 1; j <= k; ++j) value = (ez - static_cast<double>(j) * value) / z;
  return value;
}

double expm1_over(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// H written in terms of L = ln x: L^2 (phi(z + w) - phi(z)) / w with
// phi(z) = expm1(z)/z, z = gamma L, w = rho L.
double h_gamma_rho_log(double log_x, double gamma, double rho) {
  if (log_x == 0.0) return 0.0;
  const double z = gamma * log_x;
  const double w = rho * log_x;
  const double l2 = log_x * log_x;
  if (std::fabs(w) >= 1e-4) {
    return l2 * (expm1_over(z + w) - expm1_over(z)) / w;
  }
  return l2 * (exp_moment(1, z) + 0.5 * w * exp_moment(2, z) + w * w / 6.0 * exp_moment(3, z));
}

double psi(double x) { return boost::math::digamma(x); }

// Pickands kernel on already-ordered values, or NaN on a zero spacing.
double kp_or_nan(double y1, double y2, double y3) {
  const double d12 = y1 - y2;
  const double d23 = y2 - y3;
  if (!(d12 > 0.0) || !(d23 > 0.0)) return std::nan("");
  return pickands_g(std::log(d12) - std::log(d23));
}

}  // namespace

double h_gamma_rho(double x, double gamma, double rho) {
  if (!(x >= 1.0) || !std::isfinite(x)) throw Error(Errc::ArgumentOutOfRange, "H needs x >= 1");
  if (!(rho <= 0.0)) throw Error(Errc::ArgumentOutOfRange, "H needs rho <= 0");
  return h_gamma_rho_log(std::log(x), gamma, rho);
}

double erlang_neg_rho_moment(double rho, std::size_t q) {
  if (!(rho <= 0.0) || q < 1) {
    throw Error(Errc::ArgumentOutOfRange, "Erlang moment needs rho <= 0 and q >= 1");
  }
  const double qd = static_cast<double>(q);
  return std::exp(std::lgamma(qd - rho) - std::lgamma(qd));
}

BiasEstimate bias_bk_mc(double gamma, double rho, std::size_t reps, dist::RngStream& rng) {
  if (!(rho < 0.0) || reps < 10000) {
    throw Error(Errc::ArgumentOutOfRange, "bias constant needs rho < 0 and reps >= 1e4");
  }
  CompensatedSum sum, sum_sq;
  std::size_t used = 0;
  std::array<double, 3> partials{};
  while (used < reps) {
    // ln of two standard Pareto draws, ordered.
    double l_a = -std::log1p(-rng.uniform());
    double l_b = -std::log1p(-rng.uniform());
    if (l_a > l_b) std::swap(l_a, l_b);
    const double x1 = dist::h_gamma_log(gamma, l_b);
    const double x2 = dist::h_gamma_log(gamma, l_a);
    if (!(x1 - x2 > 0.0) || !(x2 > 0.0)) continue;  // measure-zero tie
    pickands_partials(x1, x2, 0.0, partials);
    // The third term carries H(1) = 0.
    const double v = partials[0] * h_gamma_rho_log(l_b, gamma, rho) +
                     partials[1] * h_gamma_rho_log(l_a, gamma, rho);
    sum += v;
    sum_sq += v * v;
    ++used;
  }
  const double nd = static_cast<double>(reps);
  const double mean = sum.value() / nd;
  const double var = std::max(0.0, (sum_sq.value() - nd * mean * mean) / (nd - 1.0));
  const double factor = erlang_neg_rho_moment(rho, 3);
  BiasEstimate out;
  out.gamma = gamma;
  out.rho = rho;
  out.reps = reps;
  out.b_k = factor * mean;
  out.stderr_ = factor * std::sqrt(var / nd);
  return out;
}

VarianceEstimate sigma2_from_estimates(const std::vector<double>& estimates, double k) {
  std::vector<double> ok;
  ok.reserve(estimates.size());
  for (double e : estimates) {
    if (std::isfinite(e)) ok.push_back(e);
  }
  if (ok.size() < 4) throw Error(Errc::ArgumentOutOfRange, "need at least 4 finite estimates");
  const double nd = static_cast<double>(ok.size());
  CompensatedSum s;
  for (double e : ok) s += e;
  const double mean = s.value() / nd;
  CompensatedSum m2, m4;
  for (double e : ok) {
    const double d = e - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = m2.value() / (nd - 1.0);
  const double mu4 = m4.value() / nd;
  // Var(s^2) ~ (mu4 - (N - 3)/(N - 1) sigma^4) / N
  const double var_of_var = std::max(0.0, (mu4 - (nd - 3.0) / (nd - 1.0) * var * var) / nd);
  VarianceEstimate out;
  out.sigma2 = k * var;
  out.stderr_ = k * std::sqrt(var_of_var);
  out.reps = ok.size();
  out.failures = estimates.size() - ok.size();
  out.mean_estimate = mean;
  out.method = VarianceMethod::KVarMc;
  return out;
}

VarianceEstimate sigma2_kvar_mc(double gamma, std::size_t n, std::size_t m, std::size_t reps,
                                const dist::RngStream& rng, std::size_t threads) {
  if (reps < 100) throw Error(Errc::ArgumentOutOfRange, "variance by simulation needs reps >= 100");
  if (m < 3 || m > n) throw Error(Errc::BlockSizeOutOfRange, "m outside [3, n]");
  const auto spec = dist::gp(gamma);
  std::vector<double> estimates(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    auto stream = rng.substream(r);
    try {
      estimates[r] = ustat::pickands_ustat(dist::sample(spec, n, stream), m);
    } catch (const Error&) {
      estimates[r] = std::nan("");
    }
  });
  VarianceEstimate out =
      sigma2_from_estimates(estimates, static_cast<double>(n) / static_cast<double>(m));
  out.gamma = gamma;
  out.n = n;
  out.m = m;
  return out;
}

GaussLegendre gauss_legendre(std::size_t count) {
  if (count < 1) throw Error(Errc::ArgumentOutOfRange, "Gauss-Legendre needs at least one node");
  GaussLegendre gl;
  gl.nodes.resize(count);
  gl.weights.resize(count);
  const double nd = static_cast<double>(count);
  for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= count; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (count == 1) p0 = 1.0;
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[count - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[count - 1 - i] = w;
  }
  return gl;
}

VarianceEstimate sigma2_integral_mc(double gamma, const IntegralOptions& opt,
                                    const dist::RngStream& rng) {
  if (opt.inner_reps < 10000 || opt.quad_nodes < 2 || opt.groups < 2 ||
      opt.inner_reps < 2 * opt.groups) {
    throw Error(Errc::ArgumentOutOfRange,
                "integral route needs inner_reps >= 1e4, >= 2 nodes and >= 2 groups");
  }
  const std::size_t nodes = opt.quad_nodes;
  const std::size_t groups = opt.groups;
  const std::size_t per_group = opt.inner_reps / groups;
  const GaussLegendre gl = gauss_legendre(nodes);

  std::vector<double> log_x(nodes), weight(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = 0.5 * (gl.nodes[i] + 1.0);
    log_x[i] = std::log(t) - std::log1p(-t);     // x = t / (1 - t)
    weight[i] = 0.5 * gl.weights[i] / ((1.0 - t) * (1.0 - t));  // dx = dt / (1 - t)^2
  }

  // Per group and node: sum and sum of squares of D = K4 - K3, where K3 is
  // the kernel without the extra point. E[K3] = gamma exactly, so E[D] equals
  // the centred mean, and D vanishes whenever the extra point lands below 0.
  std::vector<double> sums(groups * nodes, 0.0), squares(groups * nodes, 0.0);
  parallel_for(groups, opt.threads, [&](std::size_t g) {
    auto stream = rng.substream(g);
    std::vector<double> z_top(per_group), z_mid(per_group), k3(per_group), log_s(per_group);
    for (std::size_t r = 0; r < per_group; ++r) {
      while (true) {
        double a = dist::h_gamma_log(gamma, -std::log(stream.uniform()));
        double b = dist::h_gamma_log(gamma, -std::log(stream.uniform()));
        if (a < b) std::swap(a, b);
        const double s3 = -std::log(stream.uniform()) - std::log(stream.uniform()) -
                          std::log(stream.uniform());
        const double k = kp_or_nan(a, b, 0.0);
        if (std::isnan(k)) continue;
        z_top[r] = a;
        z_mid[r] = b;
        k3[r] = k;
        log_s[r] = std::log(s3);
        break;
      }
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      CompensatedSum s, sq;
      for (std::size_t r = 0; r < per_group; ++r) {
        const double v = dist::h_gamma_log(gamma, log_s[r] - log_x[i]);
        double d = 0.0;
        if (v > 0.0) {
          double kv;
          if (v < z_mid[r]) {
            kv = kp_or_nan(z_top[r], z_mid[r], v);
          } else if (v < z_top[r]) {
            kv = kp_or_nan(z_top[r], v, z_mid[r]);
          } else {
            kv = kp_or_nan(v, z_top[r], z_mid[r]);
          }
          d = std::isnan(kv) ? 0.0 : kv - k3[r];
        }
        s += d;
        sq += d * d;
      }
      sums[g * nodes + i] = s.value();
      squares[g * nodes + i] = sq.value();
    }
  });

  // Unbiased estimate of each squared mean: (S^2 - Q) / (N (N - 1)).
  auto integrate = [&](std::size_t skip) {
    const std::size_t used = skip < groups ? groups - 1 : groups;
    const double nd = static_cast<double>(used * per_group);
    CompensatedSum total;
    for (std::size_t i = 0; i < nodes; ++i) {
      CompensatedSum s, q;
      for (std::size_t g = 0; g < groups; ++g) {
        if (g == skip) continue;
        s += sums[g * nodes + i];
        q += squares[g * nodes + i];
      }
      const double sv = s.value();
      total += weight[i] * (sv * sv - q.value()) / (nd * (nd - 1.0));
    }
    return total.value();
  };

  const double full = integrate(groups);
  std::vector<double> leave_out(groups);
  CompensatedSum lo_sum;
  for (std::size_t g = 0; g < groups; ++g) {
    leave_out[g] = integrate(g);
    lo_sum += leave_out[g];
  }
  const double lo_mean = lo_sum.value() / static_cast<double>(groups);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - lo_mean) * (v - lo_mean);
  const double gd = static_cast<double>(groups);

  VarianceEstimate out;
  out.gamma = gamma;
  out.sigma2 = std::max(0.0, full);
  out.stderr_ = std::sqrt((gd - 1.0) / gd * ss);
  out.reps = per_group * groups;
  out.method = VarianceMethod::IntegralMc;
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::ArgumentOutOfRange, "normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

BootstrapResult bootstrap_ci(const SortedSample& sample, std::size_t m, std::size_t boot_reps,
                             double level, const dist::RngStream& rng, std::size_t threads) {
  if (boot_reps < 200) throw Error(Errc::ArgumentOutOfRange, "bootstrap needs at least 200 replicates");
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::ArgumentOutOfRange, "level must lie in (0, 1)");
  const double gamma_hat = ustat::pickands_ustat(sample, m);
  const auto spec = dist::gp(gamma_hat);
  const std::size_t n = sample.n();

  std::vector<double> reps(boot_reps);
  parallel_for(boot_reps, threads, [&](std::size_t b) {
    auto stream = rng.substream(b);
    try {
      reps[b] = ustat::pickands_ustat(dist::sample(spec, n, stream), m);
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateSpacing) throw;
      reps[b] = std::nan("");
    }
  });

  BootstrapResult out;
  for (double r : reps) {
    if (std::isfinite(r)) {
      out.replicates.push_back(r);
    } else {
      ++out.dropped;
    }
  }
  if (out.replicates.size() < 2) {
    throw Error(Errc::DegenerateSpacing, "too few bootstrap replicates survived");
  }
  CompensatedSum s;
  for (double r : out.replicates) s += r;
  const double nd = static_cast<double>(out.replicates.size());
  const double mean = s.value() / nd;
  CompensatedSum ss;
  for (double r : out.replicates) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss.value() / (nd - 1.0));
  const double z = normal_quantile(0.5 * (1.0 + level));

  out.record.estimator = Estimator::ExtremePickands;
  out.record.m_or_k = m;
  out.record.gamma_hat = gamma_hat;
  out.record.std_error = sd;
  out.record.ci_low = gamma_hat - z * sd;
  out.record.ci_high = gamma_hat + z * sd;
  return out;
}

DigammaMoments digamma_moments(double gamma) {
  DigammaMoments out;
  const double psi1 = psi(1.0);
  if (std::fabs(gamma) < 1e-10) {
    const double ln2 = std::numbers::ln2;
    out.e_ln_z = psi1;
    out.e_ln_z22 = psi1 + ln2;
    out.e_ln_z12 = psi1 - ln2;
    out.u1 = ln2;
    out.u2 = 2.0 * ln2;
  } else if (gamma > 0.0) {
    const double a = 1.0 / gamma;
    const double pa = psi(a), p2a = psi(2.0 * a);
    out.e_ln_z = std::log(a) + psi1 - pa;
    out.e_ln_z22 = std::log(a) + psi1 + p2a - 2.0 * pa;
    out.e_ln_z12 = std::log(a) + psi1 - p2a;
    out.u1 = gamma / 2.0 - pa + p2a;
    out.u2 = 2.0 * (p2a - pa);
  } else {
    const double a = -1.0 / gamma;
    const double pa = psi(1.0 + a), p2a = psi(1.0 + 2.0 * a);
    out.e_ln_z = std::log(a) + psi1 - pa;
    out.e_ln_z22 = std::log(a) + psi1 + p2a - 2.0 * pa;
    out.e_ln_z12 = std::log(a) + psi1 - p2a;
    out.u1 = gamma / 2.0 - pa + p2a;
    out.u2 = 2.0 * (p2a - pa);
  }
  out.kernel_mean = 2.0 * out.u1 - out.u2;
  return out;
}

}  // namespace xu::asym
