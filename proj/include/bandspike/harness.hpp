#pragma once

// Experiment harness: declarative configs, seeded Monte Carlo campaigns that
// compare sampled spiked band matrices with the spiked-model predictions,
// the exact combinatorial oracle suite, and report persistence.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bandspike/ensembles.hpp"
#include "bandspike/spectra.hpp"

namespace bandspike {

enum class ExperimentKind { Bbp, Isotropic, Variance, Semicircle, Oracle };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct SpikeConfig {
  double theta = 1.0;
  VectorPreset vector;
  bool operator==(const SpikeConfig&) const = default;
};

struct MaskConfig {
  enum class Kind { Band, Regular };
  Kind kind = Kind::Band;
  int degree = 0;  // Regular only
  bool operator==(const MaskConfig&) const = default;
};

// Unset optional tolerances fall back to the N-dependent defaults:
// location, overlap: max(0.05, 5 N^{-1/2}); edge: max(0.1, 5 N^{-1/3}).
struct Tolerances {
  std::optional<double> location;
  std::optional<double> overlap;
  std::optional<double> edge;
  double ks = 0.05;
  double moment_relative = 0.05;
  double isotropic = 0.15;
  double slope_target = -1.0;
  double slope = 0.4;
  double parseval = 1e-8;
  double interlacing_slack = 1e-8;

  double location_for(int n) const;
  double overlap_for(int n) const;
  double edge_for(int n) const;

  bool operator==(const Tolerances&) const = default;
};

struct OracleConfig {
  int moebius_degree = 5;
  int moebius_letters = 2;
  int max_dimension = 5;
  int tau_degree = 6;
  int tau_letters = 3;
  int entry_range = 3;  // integer entries drawn from [-range, range]
  bool operator==(const OracleConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Bbp;
  int n = 1000;
  BandSchedule band{BandSchedule::Kind::Fixed, 60, 1.0, 0.5};
  std::vector<int> band_ladder;
  MaskConfig mask;
  EntryDistribution distribution;  // off_diag_variance is sigma^2
  std::vector<SpikeConfig> spikes;
  int trials = 50;
  std::uint64_t seed = 0;
  std::vector<int> powers;
  double inner_product = 0.3;
  std::optional<VectorPreset> x_vector;
  OracleConfig oracle;
  int threads = 1;
  Tolerances tolerances;
  std::string output_dir;

  double sigma() const;
  // Band widths visited by ladder experiments (the single schedule value
  // when no ladder is configured).
  std::vector<int> ladder() const;
  // Default x: uniform for isotropic runs, basis(0) for variance runs.
  VectorPreset x_preset() const;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

// Unknown fields are reported through warnings (when given), not rejected.
// Throws ConfigError with line/column for JSON syntax errors and the field
// path for type errors.
ExperimentConfig parse_config(const std::string& text, std::vector<std::string>* warnings = nullptr);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

// Config JSON without execution-only fields (threads, output_dir).
nlohmann::json canonical_config_json(const ExperimentConfig& config);

// FNV-1a over the canonical JSON serialization.
std::uint64_t config_hash(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

struct BBPPrediction {
  struct Spike {
    double theta = 0.0;
    std::optional<double> outlier;
    double alignment = 0.0;
    enum class Side { Bottom, Top, None } side = Side::None;
  };
  std::vector<Spike> spikes;  // thetas ascending
  double lower_edge = 0.0;
  double upper_edge = 0.0;
  OutlierCounts counts;
};

BBPPrediction predict_bbp(std::vector<double> thetas, double sigma);

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> values;
};

struct Aggregate {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double standard_error = 0.0;
};

struct Verdict {
  std::string name;
  std::string rule;  // "abs_diff", "at_most", "equal"
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::string timestamp;
  std::vector<TrialRecord> trials;
  std::vector<Aggregate> aggregates;
  nlohmann::json predictions = nlohmann::json::object();
  nlohmann::json derived = nlohmann::json::object();
  std::map<std::string, double> tolerances;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
  const Aggregate& aggregate(const std::string& name) const;
  double mean(const std::string& name) const { return aggregate(name).mean; }
  const Verdict* verdict(const std::string& name) const;
};

// Mean, sample standard deviation and standard error of every metric, in
// name order.
std::vector<Aggregate> aggregate_trials(const std::vector<TrialRecord>& trials);

// Runs job(t) for t in [0, count) on up to `threads` workers; results are
// ordered by trial index regardless of scheduling.
std::vector<TrialRecord> run_trials(int count, int threads,
                                    const std::function<TrialRecord(int)>& job);

ExperimentReport run_bbp(const ExperimentConfig& config);
ExperimentReport run_isotropic(const ExperimentConfig& config);
ExperimentReport run_variance_scaling(const ExperimentConfig& config);
ExperimentReport run_semicircle(const ExperimentConfig& config);
ExperimentReport run_oracle(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// Identity violation found by the oracle suite; what() carries the witness.
struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Samples the configured noise matrix (band or regular mask) for one stream.
HermitianMatrix sample_noise(const ExperimentConfig& config, int band_width, std::uint64_t seed);

// Unit vectors x, y with <x, y> = c exactly: y = c x + sqrt(1 - c^2) x_perp,
// x_perp a deterministic orthogonal completion of x.
std::pair<Eigen::VectorXd, Eigen::VectorXd> correlated_pair(const Eigen::VectorXd& x, double c);

nlohmann::json report_to_json(const ExperimentReport& report);
// Report JSON without the timestamp; identical configs give identical bodies.
nlohmann::json report_body(const ExperimentReport& report);
// Writes report.json, trials.csv and summary.csv into dir (created if needed).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace bandspike
