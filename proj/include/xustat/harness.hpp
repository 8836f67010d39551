#pragma once

// Experiment runner: flat key = value configs in, CSV rows out. Every
// experiment is a pure function of its config, whatever the thread count.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xustat/dist.hpp"

namespace xu::harness {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED000000000001ULL;
inline constexpr std::size_t kBootstrapReps = 200;
inline constexpr double kBootstrapLevel = 0.95;

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input, bad sample file or unwritable output.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { MseSweep, BiasBurr, VarianceTable, Trajectory, BootstrapCoverage };

const char* to_string(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::MseSweep;
  std::string family = "GP";    // a dist::Family name, or "File" for Trajectory
  std::vector<double> params;   // family parameters; see README for per-experiment meaning
  std::string sample_path;      // family = File
  std::size_t n = 0;
  std::size_t reps = 1;
  std::vector<std::size_t> m_grid;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::size_t threads = 0;      // 0 = auto
};

/// Parses the flat key = value format. Unknown keys, duplicates, missing
/// required keys and out-of-range values raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// "3,10,50" or "a:b" or "a:b:step".
std::vector<std::size_t> parse_m_grid(const std::string& text);

/// Built-in configs: mse-gp, bias-burr, variance-table, trajectory-t4,
/// bootstrap-gp. Desk scale unless full_scale.
ExperimentConfig preset(const std::string& name, bool full_scale);
std::vector<std::string> preset_names();

/// One number per line; blank lines and '#' comments skipped.
std::vector<double> read_sample_file(const std::string& path);

struct ResultRow {
  std::string experiment;
  std::string dist;
  std::size_t n = 0;
  std::optional<std::size_t> m;
  std::optional<std::size_t> k;
  std::optional<std::size_t> rep;  // empty on aggregate rows
  std::string estimator;
  double gamma_hat = 0.0;          // mean over successes on aggregate rows
  std::size_t failed = 0;          // 0/1 per replication, failure count on aggregates
  std::optional<double> bias;
  std::optional<double> variance;
  std::optional<double> mse;
  std::string extra;               // ';'-separated key=value pairs

  bool is_aggregate() const noexcept { return !rep.has_value(); }
};

struct RunOptions {
  bool per_rep = false;                   // keep per-replication rows
  std::optional<std::size_t> threads;     // overrides the config
};

/// Aggregate over successful replications: bias = mean - truth, population
/// variance, mse = mean squared error, so mse = bias^2 + variance.
struct Aggregate {
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
};
Aggregate aggregate(const std::vector<double>& estimates, const std::vector<bool>& ok, double truth);

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});
std::vector<ResultRow> run_mse_sweep(const ExperimentConfig& config, const RunOptions& options = {});
std::vector<ResultRow> run_bias_burr(const ExperimentConfig& config, const RunOptions& options = {});
std::vector<ResultRow> run_variance_table(const ExperimentConfig& config, const RunOptions& options = {});
std::vector<ResultRow> run_trajectory(const ExperimentConfig& config, const RunOptions& options = {});
std::vector<ResultRow> run_bootstrap_coverage(const ExperimentConfig& config,
                                              const RunOptions& options = {});

inline constexpr const char* kCsvHeader =
    "experiment,dist,n,m,k,rep,estimator,gamma_hat,failed,bias,variance,mse,extra";

std::string format_number(double v);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Writes to a file; DataError if the path cannot be written.
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows);

/// Looks up key in an extra field ("a=1;b=2"); empty if absent.
std::optional<std::string> extra_value(const std::string& extra, const std::string& key);

}  // namespace xu::harness
