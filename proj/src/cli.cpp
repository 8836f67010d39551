#include "xustat/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "xustat/asymptotics.hpp"
#include "xustat/harness.hpp"
#include "xustat/ustat.hpp"

namespace xu::cli {

namespace {

using harness::format_number;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_seed(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
  if (text.empty() || text[0] == '-' || errno != 0 || end != text.c_str() + text.size()) {
    throw UsageError("--seed: expected an unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::TooFewObservations:
    case Errc::NonFiniteInput:
    case Errc::DegenerateSpacing:
    case Errc::BlockSizeOutOfRange:
    case Errc::ThresholdOutOfRange:
      return kData;
    default:
      return kUsage;
  }
}

SortedSample load_sample(const std::string& path) {
  return sort_sample(harness::read_sample_file(path));
}

void print_bootstrap(std::ostream& out, const asym::BootstrapResult& b, double level) {
  out << "std_error=" << format_number(*b.record.std_error) << '\n';
  out << "level=" << format_number(level) << '\n';
  out << "ci=[" << format_number(*b.record.ci_low) << ',' << format_number(*b.record.ci_high) << "]\n";
  out << "replicates=" << b.replicates.size() << '\n';
  out << "dropped=" << b.dropped << '\n';
}

}  // namespace

std::vector<OracleCheck> run_oracle_checks(std::uint64_t seed, double perturb) {
  std::vector<OracleCheck> checks;
  auto rel = [](double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); };

  {
    OracleCheck fast{"fast_vs_brute", false, 0.0, 1e-10};
    OracleCheck topq{"topq_vs_brute", false, 0.0, 1e-10};
    const dist::RngStream root(seed, 7);
    const auto kernel = pickands_top_q_kernel();
    for (std::size_t i = 0; i < 50; ++i) {
      auto stream = root.substream(i);
      const std::size_t n = 6 + static_cast<std::size_t>(stream.uniform() * 7.0);
      const std::size_t m = 3 + static_cast<std::size_t>(stream.uniform() * 4.0);
      const double gamma = -0.5 + 1.5 * stream.uniform();
      const SortedSample s = dist::sample(dist::gp(gamma), n, stream);
      const double brute = ustat::brute_force_ustat(s, m, kernel);
      const double closed = ustat::pickands_ustat(s, m) + perturb;
      fast.max_error = std::max(fast.max_error, rel(closed, brute));
      topq.max_error = std::max(topq.max_error, rel(ustat::topq_weighted_ustat(s, m, kernel), brute));
    }
    checks.push_back(fast);
    checks.push_back(topq);
  }
  {
    OracleCheck ex{"worked_example", false, 0.0, 1e-12};
    const auto s = SortedSample::from_descending({4.0, 3.0, 1.0, 0.0});
    ex.max_error = std::fabs(ustat::pickands_ustat(s, 3) + perturb + std::log(24.0) / 4.0);
    checks.push_back(ex);
  }
  {
    OracleCheck zs{"weight_zero_sum", false, 0.0, 1e-8};
    for (std::size_t n : {10, 100, 1000, 10000}) {
      for (std::size_t m : {std::size_t{3}, n / 10 + 3, n / 2, n}) {
        if (m > n) continue;
        const auto w = ustat::pickands_weights(n, m);
        CompensatedSum s;
        double scale = 0.0;
        for (std::size_t j = 2; j <= w.j_max(); ++j) {
          const double t = w.weight(j) * static_cast<double>(j - 1);
          s += t;
          scale += std::fabs(t);
        }
        zs.max_error = std::max(zs.max_error, std::fabs(s.value()) / scale);
      }
    }
    checks.push_back(zs);
  }
  {
    OracleCheck total{"overlap_pmf_total", false, 0.0, 1e-12};
    OracleCheck mean{"overlap_pmf_mean", false, 0.0, 1e-10};
    for (std::size_t n : {10, 100, 2000, 10000}) {
      for (std::size_t m : {std::size_t{3}, n / 10 + 3, n / 2}) {
        const auto p = ustat::overlap_pmf(n, m);
        total.max_error = std::max(total.max_error, std::fabs(p.total() - 1.0));
        const double expect = static_cast<double>(m) * static_cast<double>(m) / static_cast<double>(n);
        mean.max_error = std::max(mean.max_error, rel(p.mean(), expect));
      }
    }
    checks.push_back(total);
    checks.push_back(mean);
  }
  {
    OracleCheck dg{"digamma_identity", false, 0.0, 1e-10};
    for (int i = 0; i <= 40; ++i) {
      const double gamma = -1.0 + 0.05 * i;
      const auto d = asym::digamma_moments(gamma);
      dg.max_error = std::max(dg.max_error, std::fabs(2.0 * d.u1 - d.u2 - gamma));
    }
    checks.push_back(dg);
  }
  {
    OracleCheck h{"h_gamma_rho_limits", false, 0.0, 1e-12};
    h.max_error = std::fabs(asym::h_gamma_rho(std::exp(1.0), 0.0, 0.0) - 0.5);
    for (double g : {-0.5, 0.0, 0.5}) {
      for (double r : {-1.0, -0.25, 0.0}) h.max_error = std::max(h.max_error, std::fabs(asym::h_gamma_rho(1.0, g, r)));
    }
    checks.push_back(h);
  }
  for (auto& c : checks) c.passed = c.max_error <= c.tolerance;
  return checks;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail index estimation with extreme U-statistics", "xustat"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string seed_text = "0x5EED000000000001";
  std::size_t threads = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_text, "Master seed (decimal or 0x hex)")->capture_default_str();
  };

  // estimate
  auto* estimate = app.add_subcommand("estimate", "U-Pickands estimate for a sample file");
  std::string input;
  std::size_t m = 0;
  std::size_t boot = 0;
  double level = harness::kBootstrapLevel;
  estimate->add_option("--input", input, "Sample file, one number per line")->required();
  estimate->add_option("--m", m, "Block size (>= 3)")->required();
  estimate->add_option("--bootstrap", boot, "Parametric bootstrap replicates (0 = none, else >= 200)");
  estimate->add_option("--level", level, "Confidence level for the bootstrap interval")->capture_default_str();
  estimate->add_option("--threads", threads, "Worker threads (0 = auto)");
  add_seed(estimate);

  // weights
  auto* weights = app.add_subcommand("weights", "Log-spacing weights w_j of the closed form");
  std::size_t wn = 0;
  weights->add_option("--n", wn, "Sample size")->required();
  weights->add_option("--m", m, "Block size")->required();
  add_seed(weights);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run an experiment and write CSV");
  std::string config_path, preset, out_path;
  bool full_scale = false, per_rep = false;
  std::optional<std::size_t> sim_threads;
  std::string sim_seed;
  auto* opt_config = simulate->add_option("--config", config_path, "Experiment config file");
  auto* opt_preset = simulate->add_option("--preset", preset, "Built-in experiment")
                         ->check(CLI::IsMember(harness::preset_names()));
  opt_config->excludes(opt_preset);
  simulate->add_flag("--full-scale", full_scale, "Use the large preset (with --preset)");
  simulate->add_flag("--per-rep", per_rep, "Also write one row per replication");
  simulate->add_option("--out", out_path, "Output CSV path (overrides the config)");
  simulate->add_option("--threads", sim_threads, "Worker threads (overrides the config)");
  simulate->add_option("--seed", sim_seed, "Master seed (overrides the config)");

  // variance-table
  auto* vtable = app.add_subcommand("variance-table", "Asymptotic variance sigma^2 by simulation");
  std::vector<double> gammas;
  std::size_t vn = 2000, vm = 20, vreps = 1000, inner = 200000, nodes = 128;
  std::string method = "kvar";
  vtable->add_option("--gamma", gammas, "Gamma values")->required()->delimiter(',');
  vtable->add_option("--n", vn, "Sample size (kvar)")->capture_default_str();
  vtable->add_option("--m", vm, "Block size (kvar)")->capture_default_str();
  vtable->add_option("--reps", vreps, "Replications (kvar)")->capture_default_str();
  vtable->add_option("--method", method, "kvar or integral")
      ->check(CLI::IsMember({"kvar", "integral"}))
      ->capture_default_str();
  vtable->add_option("--inner-reps", inner, "Inner draws (integral)")->capture_default_str();
  vtable->add_option("--nodes", nodes, "Gauss-Legendre nodes (integral)")->capture_default_str();
  vtable->add_option("--threads", threads, "Worker threads (0 = auto)");
  add_seed(vtable);

  // bias
  auto* bias = app.add_subcommand("bias", "Asymptotic bias constant B_K by Monte Carlo");
  double bgamma = 0.0;
  std::vector<double> rhos;
  std::size_t breps = 1000000;
  bias->add_option("--gamma", bgamma, "Extreme value index")->required();
  bias->add_option("--rho", rhos, "Second-order parameters (< 0)")->required()->delimiter(',');
  bias->add_option("--reps", breps, "Monte Carlo draws (>= 10000)")->capture_default_str();
  add_seed(bias);

  // bootstrap
  auto* bootstrap = app.add_subcommand("bootstrap", "Parametric bootstrap interval for a sample file");
  std::size_t boot_reps = harness::kBootstrapReps;
  bootstrap->add_option("--input", input, "Sample file, one number per line")->required();
  bootstrap->add_option("--m", m, "Block size (>= 3)")->required();
  bootstrap->add_option("--reps", boot_reps, "Bootstrap replicates (>= 200)")->capture_default_str();
  bootstrap->add_option("--level", level, "Confidence level")->capture_default_str();
  bootstrap->add_option("--threads", threads, "Worker threads (0 = auto)");
  add_seed(bootstrap);

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "Exact-math self checks");
  double inject = 0.0;
  add_seed(oracle);
  oracle->add_option("--inject-fault", inject, "Offset added to the closed form")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*estimate || *bootstrap) {
      const std::uint64_t seed = parse_seed(seed_text);
      if (m < 3) throw UsageError("--m must be at least 3");
      const std::size_t reps = *estimate ? boot : boot_reps;
      const bool with_boot = *bootstrap || boot > 0;
      if (with_boot && reps < 200) throw UsageError("bootstrap needs at least 200 replicates");
      if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
      const SortedSample sample = load_sample(input);
      if (m > sample.n()) {
        throw Error(Errc::BlockSizeOutOfRange,
                    "m = " + std::to_string(m) + " exceeds n = " + std::to_string(sample.n()));
      }
      const double gamma_hat = ustat::pickands_ustat(sample, m);
      out << "gamma_hat=" << format_number(gamma_hat) << '\n';
      out << "n=" << sample.n() << '\n';
      out << "m=" << m << '\n';
      if (with_boot) {
        const auto b = asym::bootstrap_ci(sample, m, reps, level, dist::RngStream(seed, 1), threads);
        print_bootstrap(out, b, level);
      }
      return kOk;
    }
    if (*weights) {
      (void)parse_seed(seed_text);
      if (m < 3 || m > wn) throw UsageError("need 3 <= m <= n");
      const auto w = ustat::pickands_weights(wn, m);
      CompensatedSum zs;
      for (std::size_t j = 2; j <= w.j_max(); ++j) {
        out << "j=" << j << " weight=" << format_number(w.weight(j)) << '\n';
        zs += w.weight(j) * static_cast<double>(j - 1);
      }
      out << "zero_sum=" << format_number(zs.value()) << '\n';
      return kOk;
    }
    if (*simulate) {
      harness::ExperimentConfig config;
      if (!config_path.empty()) {
        if (full_scale) throw UsageError("--full-scale applies to --preset only");
        config = harness::load_config(config_path);
      } else if (!preset.empty()) {
        config = harness::preset(preset, full_scale);
      } else {
        throw UsageError("simulate needs --config or --preset");
      }
      if (!sim_seed.empty()) config.seed = parse_seed(sim_seed);
      if (!out_path.empty()) config.out = out_path;
      if (config.out.empty()) throw UsageError("no output path: set out in the config or pass --out");
      harness::RunOptions options;
      options.per_rep = per_rep;
      options.threads = sim_threads;
      const auto rows = harness::run_experiment(config, options);
      harness::write_csv_file(config.out, rows);
      const auto aggregates = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.is_aggregate(); });
      out << "experiment=" << harness::to_string(config.experiment) << '\n';
      out << "rows=" << rows.size() << '\n';
      out << "aggregate_rows=" << aggregates << '\n';
      out << "out=" << config.out << '\n';
      return kOk;
    }
    if (*vtable) {
      const std::uint64_t seed = parse_seed(seed_text);
      for (double g : gammas) {
        asym::VarianceEstimate v;
        if (method == "kvar") {
          v = asym::sigma2_kvar_mc(g, vn, vm, vreps, dist::RngStream(seed, 0), threads);
        } else {
          asym::IntegralOptions opt;
          opt.inner_reps = inner;
          opt.quad_nodes = nodes;
          opt.threads = threads;
          v = asym::sigma2_integral_mc(g, opt, dist::RngStream(seed, 0));
        }
        out << "gamma=" << format_number(g) << " sigma2=" << format_number(v.sigma2)
            << " stderr=" << format_number(v.stderr_) << " method=" << method
            << " ml_reference=" << format_number((1.0 + g) * (1.0 + g) / 3.0) << '\n';
      }
      return kOk;
    }
    if (*bias) {
      const std::uint64_t seed = parse_seed(seed_text);
      for (double r : rhos) {
        dist::RngStream rng(seed, 0);
        const auto b = asym::bias_bk_mc(bgamma, r, breps, rng);
        out << "gamma=" << format_number(bgamma) << " rho=" << format_number(r)
            << " b_k=" << format_number(b.b_k) << " stderr=" << format_number(b.stderr_) << '\n';
      }
      return kOk;
    }
    if (*oracle) {
      const auto checks = run_oracle_checks(parse_seed(seed_text), inject);
      std::size_t failed = 0;
      for (const auto& c : checks) {
        failed += c.passed ? 0 : 1;
        out << "check=" << c.name << " status=" << (c.passed ? "PASS" : "FAIL")
            << " max_error=" << format_number(c.max_error) << " tolerance=" << format_number(c.tolerance) << '\n';
      }
      out << "checks=" << checks.size() << " failed=" << failed << " status=" << (failed ? "FAIL" : "PASS") << '\n';
      return failed ? kCheckFailed : kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const harness::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const harness::DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << (code == kData ? "data error: " : "usage error: ") << e.what() << '\n';
    return code;
  }
  return kUsage;
}

}  // namespace xu::cli
