#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectral/optim.hpp"
#include "spectral/spectrum.hpp"

namespace spectral::experiment {

enum class Split { Train, Test };
enum class Metric { SpectralRisk, Misclass };

struct TrajectoryRecord {
  std::size_t trial = 0;
  std::size_t epoch = 0;
  Split split = Split::Train;
  Metric metric = Metric::SpectralRisk;
  Method method = Method::Default;
  double value = 0.0;
};

struct SummaryRow {
  Method method = Method::Default;
  std::size_t epoch = 0;
  Split split = Split::Train;
  Metric metric = Metric::SpectralRisk;
  double mean = 0.0;
  double std = 0.0;
};

/// Everything a run needs. Every field can be set from a `key = value` config
/// file or a command-line flag of the same name via `set`.
struct Config {
  std::string data;    // delimited file; empty when synthetic is used
  std::string schema;  // schema file for `data`
  char delimiter = ',';
  std::string synthetic;  // "two-gaussian"
  std::size_t synthetic_n = 5000;
  std::size_t synthetic_p = 2;
  double separation = 2.0;

  std::vector<Method> methods{Method::Default, Method::Fast, Method::Off};
  std::string spectrum = "exp";
  double spec_c = 1.0;
  double spec_beta = 0.5;

  std::size_t epochs = 50;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double radius = 100.0;
  double gamma = 1.0;
  double smoothing_delta = 0.5;
  std::optional<std::size_t> ancillary;  // empty: ceil(sqrt(n_train))
  std::optional<double> step_size;       // empty: per-method defaults

  bool theory_steps = false;  // default method only
  TheoryConstants theory;

  bool boost = false;
  double delta = 0.1;

  std::size_t jobs = 1;
  std::string out = "out";

  /// Applies one `key = value` setting. Keys use the flag spelling without
  /// leading dashes (e.g. "spec-c", "test-fraction"). Throws
  /// std::invalid_argument with the offending key on bad input.
  void set(const std::string& key, const std::string& value);

  /// Reads a flat key-value file (`#` comments, blank lines ignored).
  static std::map<std::string, std::string> read_file(const std::filesystem::path& path);

  Spectrum make_spectrum() const;
  void validate() const;
  /// Resolved settings, one `key = value` per line.
  std::string dump() const;
};

struct BoostTrialRow {
  std::size_t trial = 0;
  std::size_t candidate = 0;
  double estimate = 0.0;
  bool selected = false;
  double test_spectral_risk = 0.0;
  double test_misclass = 0.0;
};

struct Result {
  std::vector<TrajectoryRecord> records;  // sorted by trial, epoch, split, metric, method
  std::vector<BoostTrialRow> boost_rows;
  std::string runlog;
};

/// Runs every trial (in parallel up to cfg.jobs) and gathers the
/// trajectories. Output is independent of scheduling.
Result run_experiment(const Config& cfg);

/// Writes trajectories.csv, summary.csv and runlog.txt (plus boost.csv when
/// boosting) into cfg.out.
void write_outputs(const Config& cfg, const Result& result);

inline constexpr const char* kTrajectoryHeader = "trial,epoch,split,metric,method,value";
inline constexpr const char* kSummaryHeader = "method,epoch,split,metric,mean,std";

void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& records);
/// Throws std::runtime_error if the header does not match.
std::vector<TrajectoryRecord> read_trajectories(std::istream& in);

/// Mean and sample standard deviation (n - 1; zero for one trial) per
/// (method, epoch, split, metric).
std::vector<SummaryRow> summarize(const std::vector<TrajectoryRecord>& records);
std::vector<SummaryRow> summarize_files(const std::vector<std::filesystem::path>& paths);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);


}  // namespace spectral::experiment
