#include "xustat/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "xustat/asymptotics.hpp"
#include "xustat/estimators.hpp"
#include "xustat/ustat.hpp"

namespace xu::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size();
}

bool parse_count(const std::string& text, std::size_t& out) {
  if (text.empty() || text[0] == '-' || text[0] == '+') return false;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end != text.c_str() + text.size()) return false;
  out = static_cast<std::size_t>(v);
  return true;
}

std::size_t require_count(const std::string& key, const std::string& value) {
  std::size_t v = 0;
  if (!parse_count(value, v)) throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  return v;
}

std::string fmt(double v) { return format_number(v); }

bool success(const EstimateRecord& r) { return r.ok() && r.converged; }

dist::DistributionSpec spec_of(const ExperimentConfig& c) {
  const auto family = dist::parse_family(c.family);
  if (!family) throw ConfigError("family: unknown distribution '" + c.family + "'");
  try {
    return dist::make_spec(*family, c.params);
  } catch (const Error& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
}

std::size_t threads_of(const ExperimentConfig& c, const RunOptions& o) {
  return o.threads.value_or(c.threads);
}

dist::RngStream data_stream(const ExperimentConfig& c) { return dist::RngStream(c.seed, 0); }

ResultRow base_row(const ExperimentConfig& c, const std::string& dist, std::size_t n) {
  ResultRow row;
  row.experiment = to_string(c.experiment);
  row.dist = dist;
  row.n = n;
  return row;
}

std::string aggregate_extra(const Aggregate& a) {
  std::string s = "successes=" + std::to_string(a.successes);
  const double se = a.successes > 1 ? std::sqrt(a.variance / static_cast<double>(a.successes - 1))
                                    : std::nan("");
  s += ";bias_se=" + fmt(se);
  return s;
}

void fill_aggregate(ResultRow& row, const Aggregate& a, bool has_truth) {
  row.gamma_hat = a.mean;
  row.failed = a.failures;
  if (has_truth) {
    row.bias = a.bias;
    row.mse = a.mse;
  }
  row.variance = a.variance;
}

// Both estimators over one m-grid for every replication of one distribution.
void sweep(const ExperimentConfig& c, const RunOptions& o, const dist::DistributionSpec& spec,
           const std::string& extra_prefix, std::vector<ResultRow>& rows) {
  const std::size_t reps = c.reps;
  const std::size_t cells = c.m_grid.size();
  std::vector<EstimateRecord> pick(reps * cells), ml(reps * cells);
  const auto root = data_stream(c);
  parallel_for(reps, threads_of(c, o), [&](std::size_t r) {
    auto stream = root.substream(r);
    const SortedSample sample = dist::sample(spec, c.n, stream);
    const auto traj = est::pickands_trajectory(sample, c.m_grid);
    for (std::size_t i = 0; i < cells; ++i) {
      pick[r * cells + i] = traj[i];
      const std::size_t k_nominal = est::paired_threshold_count(c.n, c.m_grid[i]);
      if (k_nominal < 5) {
        EstimateRecord rec;
        rec.estimator = Estimator::GpMl;
        rec.m_or_k = k_nominal;
        rec.failure = Errc::ThresholdOutOfRange;
        ml[r * cells + i] = rec;
      } else {
        ml[r * cells + i] = est::gp_ml_record(sample, std::min(k_nominal, c.n - 1));
      }
    }
  });

  const std::string label = spec.label();
  const bool has_truth = spec.true_gamma.has_value();
  const double truth = spec.true_gamma.value_or(std::nan(""));
  auto k_of = [&](const EstimateRecord& rec, std::size_t m) {
    return rec.estimator == Estimator::ExtremePickands ? c.n / m : rec.m_or_k;
  };

  if (o.per_rep) {
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t i = 0; i < cells; ++i) {
        for (const EstimateRecord* rec : {&pick[r * cells + i], &ml[r * cells + i]}) {
          ResultRow row = base_row(c, label, c.n);
          row.m = c.m_grid[i];
          row.k = k_of(*rec, c.m_grid[i]);
          row.rep = r;
          row.estimator = to_string(rec->estimator);
          row.gamma_hat = rec->gamma_hat;
          row.failed = success(*rec) ? 0 : 1;
          row.extra = extra_prefix;
          if (rec->failure) {
            row.extra += (row.extra.empty() ? "" : ";") + std::string("error=") + to_string(*rec->failure);
          } else if (!rec->converged) {
            row.extra += (row.extra.empty() ? "" : ";") + std::string("error=NonConvergence");
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }

  for (std::size_t i = 0; i < cells; ++i) {
    for (const auto* set : {&pick, &ml}) {
      std::vector<double> values(reps);
      std::vector<bool> ok(reps);
      std::size_t nonconverged = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const EstimateRecord& rec = (*set)[r * cells + i];
        values[r] = rec.gamma_hat;
        ok[r] = success(rec);
        if (rec.ok() && !rec.converged) ++nonconverged;
      }
      const EstimateRecord& first = (*set)[i];
      const Aggregate a = aggregate(values, ok, truth);
      ResultRow row = base_row(c, label, c.n);
      row.m = c.m_grid[i];
      row.k = k_of(first, c.m_grid[i]);
      row.estimator = to_string(first.estimator);
      fill_aggregate(row, a, has_truth);
      row.extra = (extra_prefix.empty() ? "" : extra_prefix + ";") + aggregate_extra(a);
      if (first.estimator == Estimator::GpMl) row.extra += ";nonconverged=" + std::to_string(nonconverged);
      rows.push_back(std::move(row));
    }
  }
}

void require_m_grid(const ExperimentConfig& c, std::size_t n) {
  if (c.m_grid.empty()) throw ConfigError("m_grid: must not be empty");
  for (std::size_t m : c.m_grid) {
    if (m < 3 || m > n) {
      throw ConfigError("m_grid: block size " + std::to_string(m) + " outside [3, " + std::to_string(n) + "]");
    }
  }
}

void validate(const ExperimentConfig& c) {
  if (c.reps < 1) throw ConfigError("reps: must be at least 1");
  const bool from_file = c.family == "File";
  if (from_file) {
    if (c.experiment != Experiment::Trajectory) throw ConfigError("family File is only valid for Trajectory");
    if (c.sample_path.empty()) throw ConfigError("params: File needs a sample path");
    if (c.m_grid.empty()) throw ConfigError("m_grid: must not be empty");
    return;
  }
  if (c.n < 3) throw ConfigError("n: must be at least 3");
  require_m_grid(c, c.n);
  switch (c.experiment) {
    case Experiment::MseSweep:
    case Experiment::Trajectory:
      (void)spec_of(c);
      break;
    case Experiment::BiasBurr:
      if (c.family != "Burr") throw ConfigError("BiasBurr: family must be Burr");
      if (c.params.size() < 2) throw ConfigError("BiasBurr: params are gamma followed by at least one rho");
      if (!(c.params[0] > 0.0)) throw ConfigError("BiasBurr: gamma must be positive");
      for (std::size_t i = 1; i < c.params.size(); ++i) {
        if (!(c.params[i] < 0.0)) throw ConfigError("BiasBurr: every rho must be negative");
      }
      break;
    case Experiment::VarianceTable:
      if (c.family != "GP") throw ConfigError("VarianceTable: family must be GP");
      if (c.params.empty()) throw ConfigError("VarianceTable: params is the gamma grid and must not be empty");
      if (c.m_grid.size() != 1) throw ConfigError("VarianceTable: m_grid must hold exactly one block size");
      if (c.reps < 100) throw ConfigError("VarianceTable: reps must be at least 100");
      break;
    case Experiment::BootstrapCoverage:
      if (c.family != "GP" || c.params.size() != 1) {
        throw ConfigError("BootstrapCoverage: family must be GP with a single gamma");
      }
      break;
  }
}

}  // namespace

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::MseSweep: return "MseSweep";
    case Experiment::BiasBurr: return "BiasBurr";
    case Experiment::VarianceTable: return "VarianceTable";
    case Experiment::Trajectory: return "Trajectory";
    case Experiment::BootstrapCoverage: return "BootstrapCoverage";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::MseSweep, Experiment::BiasBurr, Experiment::VarianceTable,
                       Experiment::Trajectory, Experiment::BootstrapCoverage}) {
    if (name == to_string(e)) return e;
  }
  return std::nullopt;
}

std::vector<std::size_t> parse_m_grid(const std::string& text) {
  std::vector<std::size_t> out;
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("m_grid: expected a:b or a:b:step");
    const std::size_t a = require_count("m_grid", parts[0]);
    const std::size_t b = require_count("m_grid", parts[1]);
    const std::size_t step = parts.size() == 3 ? require_count("m_grid", parts[2]) : 1;
    if (step == 0 || b < a) throw ConfigError("m_grid: empty range '" + t + "'");
    for (std::size_t m = a; m <= b; m += step) out.push_back(m);
  } else {
    for (const auto& p : split(t, ',')) out.push_back(require_count("m_grid", p));
  }
  if (out.empty()) throw ConfigError("m_grid: must not be empty");
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  static const std::vector<std::string> keys = {"experiment", "family", "params", "n", "reps",
                                                "m_grid", "seed", "out", "threads"};
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }

  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  };

  ExperimentConfig c;
  const auto exp = parse_experiment(need("experiment"));
  if (!exp) throw ConfigError("experiment: unknown experiment '" + kv["experiment"] + "'");
  c.experiment = *exp;
  c.family = need("family");
  if (c.family == "File") {
    c.sample_path = need("params");
  } else if (kv.count("params") && !kv["params"].empty()) {
    for (const auto& p : split(kv["params"], ',')) {
      double v = 0.0;
      if (!parse_double(p, v) || !std::isfinite(v)) throw ConfigError("params: bad number '" + p + "'");
      c.params.push_back(v);
    }
  }
  if (c.family != "File" || kv.count("n")) c.n = require_count("n", need("n"));
  c.reps = kv.count("reps") ? require_count("reps", need("reps")) : 1;
  c.m_grid = parse_m_grid(need("m_grid"));
  if (kv.count("seed")) {
    const std::string& s = need("seed");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 0);
    if (errno != 0 || end != s.c_str() + s.size() || s[0] == '-') {
      throw ConfigError("seed: expected an unsigned 64-bit integer, got '" + s + "'");
    }
    c.seed = v;
  }
  if (kv.count("out")) c.out = kv["out"];
  if (kv.count("threads")) {
    const std::string& t = need("threads");
    if (t == "auto") {
      c.threads = 0;
    } else {
      c.threads = require_count("threads", t);
      if (c.threads == 0) throw ConfigError("threads: use 'auto' or a positive count");
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::vector<std::string> preset_names() {
  return {"mse-gp", "bias-burr", "variance-table", "trajectory-t4", "bootstrap-gp"};
}

ExperimentConfig preset(const std::string& name, bool full_scale) {
  ExperimentConfig c;
  c.out = name + ".csv";
  if (name == "mse-gp") {
    c.experiment = Experiment::MseSweep;
    c.family = "GP";
    c.params = {0.5};
    c.n = full_scale ? 10000 : 2000;
    c.reps = full_scale ? 100 : 200;
    c.m_grid = full_scale ? std::vector<std::size_t>{3, 5, 10, 20, 50, 100, 200, 500}
                          : std::vector<std::size_t>{3, 10, 20, 50, 100, 200};
  } else if (name == "bias-burr") {
    c.experiment = Experiment::BiasBurr;
    c.family = "Burr";
    c.params = {0.5, -2.0, -1.0, -0.5, -0.25};
    c.n = full_scale ? 10000 : 2000;
    c.reps = full_scale ? 1000 : 300;
    c.m_grid = full_scale ? std::vector<std::size_t>{10, 20, 50, 100, 200, 500}
                          : std::vector<std::size_t>{10, 20, 40, 100};
  } else if (name == "variance-table") {
    c.experiment = Experiment::VarianceTable;
    c.family = "GP";
    if (full_scale) {
      for (int i = 0; i < 50; ++i) c.params.push_back(-1.0 + 2.0 * i / 49.0);
    } else {
      c.params = {-0.51, 0.02, 0.51};
    }
    c.n = full_scale ? 10000 : 2000;
    c.reps = 1000;
    c.m_grid = {full_scale ? std::size_t{100} : std::size_t{20}};
  } else if (name == "trajectory-t4") {
    c.experiment = Experiment::Trajectory;
    c.family = "StudentT";
    c.params = {4.0};
    c.n = 10000;
    c.reps = 1;
    c.m_grid = parse_m_grid("3:500");
  } else if (name == "bootstrap-gp") {
    c.experiment = Experiment::BootstrapCoverage;
    c.family = "GP";
    c.params = {0.5};
    c.n = full_scale ? 2000 : 1000;
    c.reps = full_scale ? 200 : 100;
    c.m_grid = {full_scale ? std::size_t{20} : std::size_t{10}};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate(c);
  return c;
}

std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sample file '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    double v = 0.0;
    if (!parse_double(line, v) || !std::isfinite(v)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": not a finite number: '" + line + "'");
    }
    out.push_back(v);
  }
  return out;
}

Aggregate aggregate(const std::vector<double>& estimates, const std::vector<bool>& ok, double truth) {
  Aggregate a;
  CompensatedSum sum;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (ok[i] && std::isfinite(estimates[i])) {
      sum += estimates[i];
      ++a.successes;
    } else {
      ++a.failures;
    }
  }
  if (a.successes == 0) {
    a.mean = a.bias = a.variance = a.mse = std::nan("");
    return a;
  }
  const double nd = static_cast<double>(a.successes);
  a.mean = sum.value() / nd;
  CompensatedSum dev;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (ok[i] && std::isfinite(estimates[i])) dev += (estimates[i] - a.mean) * (estimates[i] - a.mean);
  }
  a.variance = dev.value() / nd;
  a.bias = a.mean - truth;
  a.mse = a.bias * a.bias + a.variance;
  return a;
}

std::vector<ResultRow> run_mse_sweep(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  std::vector<ResultRow> rows;
  sweep(c, o, spec_of(c), "", rows);
  return rows;
}

std::vector<ResultRow> run_bias_burr(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  std::vector<ResultRow> rows;
  const double gamma = c.params[0];
  // Every rho reuses the same uniforms (stream r), so differences across rho
  // are not blurred by independent sampling noise.
  for (std::size_t i = 1; i < c.params.size(); ++i) {
    const double rho = c.params[i];
    sweep(c, o, dist::burr_from_gamma_rho(gamma, rho), "rho=" + fmt(rho), rows);
  }
  return rows;
}

std::vector<ResultRow> run_variance_table(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  std::vector<ResultRow> rows;
  const std::size_t m = c.m_grid[0];
  const double k = static_cast<double>(c.n) / static_cast<double>(m);
  for (double gamma : c.params) {
    const auto v = asym::sigma2_kvar_mc(gamma, c.n, m, c.reps, data_stream(c), threads_of(c, o));
    const double nd = static_cast<double>(v.reps);
    ResultRow row = base_row(c, dist::gp(gamma).label(), c.n);
    row.m = m;
    row.k = c.n / m;
    row.estimator = to_string(Estimator::ExtremePickands);
    row.gamma_hat = v.mean_estimate;
    row.failed = v.failures;
    row.bias = v.mean_estimate - gamma;
    row.variance = v.sigma2 / k * (nd - 1.0) / nd;
    row.mse = *row.bias * *row.bias + *row.variance;
    row.extra = "successes=" + std::to_string(v.reps) + ";sigma2=" + fmt(v.sigma2) +
                ";sigma2_se=" + fmt(v.stderr_) + ";ml_reference=" + fmt((1.0 + gamma) * (1.0 + gamma) / 3.0);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_trajectory(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  (void)o;
  std::string label;
  std::optional<SortedSample> sample;
  std::optional<double> truth;
  if (c.family == "File") {
    auto values = read_sample_file(c.sample_path);
    try {
      sample = sort_sample(values);
    } catch (const Error& e) {
      throw DataError(c.sample_path + ": " + e.what());
    }
    label = "File";
  } else {
    const auto spec = spec_of(c);
    auto stream = data_stream(c).substream(0);
    sample = dist::sample(spec, c.n, stream);
    label = spec.label();
    truth = spec.true_gamma;
  }
  const std::size_t n = sample->n();
  const auto traj = est::pickands_trajectory(*sample, c.m_grid);
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.m_grid.size(); ++i) {
    const std::size_t m = c.m_grid[i];
    const std::size_t k_nominal = est::paired_threshold_count(n, m);
    EstimateRecord ml;
    ml.estimator = Estimator::GpMl;
    ml.m_or_k = k_nominal;
    if (m < 3 || m > n) {
      ml.failure = Errc::BlockSizeOutOfRange;
    } else if (k_nominal < 5) {
      ml.failure = Errc::ThresholdOutOfRange;
    } else {
      ml = est::gp_ml_record(*sample, std::min(k_nominal, n - 1));
    }
    for (const EstimateRecord* rec : {&traj[i], static_cast<const EstimateRecord*>(&ml)}) {
      ResultRow row = base_row(c, label, n);
      row.m = m;
      row.k = rec->estimator == Estimator::ExtremePickands ? n / m : rec->m_or_k;
      row.rep = 0;
      row.estimator = to_string(rec->estimator);
      row.gamma_hat = rec->gamma_hat;
      row.failed = success(*rec) ? 0 : 1;
      if (truth && success(*rec)) row.bias = rec->gamma_hat - *truth;
      if (rec->failure) {
        row.extra = std::string("error=") + to_string(*rec->failure);
      } else if (!rec->converged) {
        row.extra = "error=NonConvergence";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_bootstrap_coverage(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  const auto spec = spec_of(c);
  const double gamma = c.params[0];
  const auto root = data_stream(c);
  const dist::RngStream boot_root(c.seed, 1);
  std::vector<ResultRow> rows;
  for (std::size_t m : c.m_grid) {
    std::vector<asym::BootstrapResult> results(c.reps);
    std::vector<bool> ok(c.reps, true);
    parallel_for(c.reps, threads_of(c, o), [&](std::size_t r) {
      auto stream = root.substream(r);
      const SortedSample sample = dist::sample(spec, c.n, stream);
      try {
        results[r] = asym::bootstrap_ci(sample, m, kBootstrapReps, kBootstrapLevel,
                                        boot_root.substream(r), 1);
      } catch (const Error& e) {
        ok[r] = false;
        results[r].record.failure = e.code();
      }
    });
    std::vector<double> values(c.reps);
    std::size_t covered = 0;
    CompensatedSum width;
    for (std::size_t r = 0; r < c.reps; ++r) {
      const auto& rec = results[r].record;
      values[r] = rec.gamma_hat;
      if (!ok[r]) continue;
      const bool hit = *rec.ci_low <= gamma && gamma <= *rec.ci_high;
      covered += hit ? 1 : 0;
      width += *rec.ci_high - *rec.ci_low;
      if (o.per_rep) {
        ResultRow row = base_row(c, spec.label(), c.n);
        row.m = m;
        row.k = c.n / m;
        row.rep = r;
        row.estimator = to_string(Estimator::ExtremePickands);
        row.gamma_hat = rec.gamma_hat;
        row.extra = "ci_low=" + fmt(*rec.ci_low) + ";ci_high=" + fmt(*rec.ci_high) +
                    ";covered=" + (hit ? "1" : "0") + ";dropped=" + std::to_string(results[r].dropped);
        rows.push_back(std::move(row));
      }
    }
    if (o.per_rep) {
      for (std::size_t r = 0; r < c.reps; ++r) {
        if (ok[r]) continue;
        ResultRow row = base_row(c, spec.label(), c.n);
        row.m = m;
        row.k = c.n / m;
        row.rep = r;
        row.estimator = to_string(Estimator::ExtremePickands);
        row.gamma_hat = std::nan("");
        row.failed = 1;
        row.extra = std::string("error=") + to_string(*results[r].record.failure);
        rows.push_back(std::move(row));
      }
    }
    const Aggregate a = aggregate(values, ok, gamma);
    ResultRow row = base_row(c, spec.label(), c.n);
    row.m = m;
    row.k = c.n / m;
    row.estimator = to_string(Estimator::ExtremePickands);
    fill_aggregate(row, a, true);
    const double sd = static_cast<double>(a.successes);
    row.extra = aggregate_extra(a) + ";coverage=" + fmt(a.successes ? covered / sd : std::nan("")) +
                ";mean_width=" + fmt(a.successes ? width.value() / sd : std::nan("")) +
                ";level=" + fmt(kBootstrapLevel) + ";boot_reps=" + std::to_string(kBootstrapReps);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c, const RunOptions& o) {
  switch (c.experiment) {
    case Experiment::MseSweep: return run_mse_sweep(c, o);
    case Experiment::BiasBurr: return run_bias_burr(c, o);
    case Experiment::VarianceTable: return run_variance_table(c, o);
    case Experiment::Trajectory: return run_trajectory(c, o);
    case Experiment::BootstrapCoverage: return run_bootstrap_coverage(c, o);
  }
  throw ConfigError("unknown experiment");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  auto opt_count = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); };
  auto opt_num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.dist << ',' << r.n << ',' << opt_count(r.m) << ','
        << opt_count(r.k) << ',' << (r.rep ? std::to_string(*r.rep) : std::string("agg")) << ','
        << r.estimator << ',' << format_number(r.gamma_hat) << ',' << r.failed << ','
        << opt_num(r.bias) << ',' << opt_num(r.variance) << ',' << opt_num(r.mse) << ','
        << r.extra << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, rows);
  out.flush();
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::optional<std::string> extra_value(const std::string& extra, const std::string& key) {
  for (const auto& part : split(extra, ';')) {
    const auto eq = part.find('=');
    if (eq != std::string::npos && part.substr(0, eq) == key) return part.substr(eq + 1);
  }
  return std::nullopt;
}

}  // namespace xu::harness
