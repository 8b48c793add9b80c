#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "umni/metrics.hpp"
#include "umni/recovery.hpp"
#include "umni/scm.hpp"

namespace umni {

enum class ScoreMode { oracle, estimated };

const char* to_string(ScoreMode m);
ScoreMode score_mode_from_string(const std::string& s);

struct ExperimentConfig {
  int n = 4;
  int d = 5;
  long long n_samples = 100000;
  int n_graphs = 200;
  double density = 0.5;
  InterventionKind kind = InterventionKind::soft;
  ScoreMode score_mode = ScoreMode::estimated;
  std::uint64_t seed = 1;
  // 0 = the score mode's default
  double rank_tau = 0;
  double rank_abs = 0;
  double basis_tol = 0;
  double mixing_threshold = 0.1;
  double ci_alpha = 0.05;
  bool normalize_rows = true;
  bool whiten = true;
  AlignmentRule alignment = AlignmentRule::peeling;
  int jobs = 0;  // 0 = OpenMP default
  std::string out;  // output prefix; empty = no files

  /// Throws ArgumentError on d < n, n < 1, n_graphs < 1 or non-positive tolerances.
  void validate() const;
  UmniOptions umni_options() const;
};

/// Generated ground truth for one trial.
struct TrialInstance {
  Dag dag;
  LinearGaussianSem sem;
  ObservationModel model;
  std::vector<EnvironmentSpec> environments;  // interventional only
};

TrialInstance make_instance(const ExperimentConfig& config, std::uint64_t trial_seed);

/// splitmix64 finalizer applied to seed + index.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);
std::uint64_t mix_seed(std::uint64_t x);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  int failed_stage = 0;
  std::string error;
  int shd_value = 0;
  std::optional<double> mixing_ratio;
  int true_edges = 0;
  int estimated_edges = 0;
  std::optional<UmniResult> recovery;     // kept when requested
  std::optional<EvaluationReport> report;
};

/// Deterministic in (config, seed). Stage failures become failed rows.
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed, int trial_index = 0,
                      bool keep_recovery = false);

struct BatchSummary {
  int n_ok = 0;
  int n_failed = 0;
  double mean_shd = 0;
  double mean_ratio = 0;  // over ok trials with a defined ratio
  int ratio_count = 0;
};

struct BatchResult {
  std::vector<TrialResult> trials;  // sorted by trial index
  BatchSummary summary;
};

BatchSummary summarize(const std::vector<TrialResult>& trials);
BatchResult run_batch(const ExperimentConfig& config);

inline constexpr const char* kTrialCsvVersion = "# umni-crl trials v1";
inline constexpr const char* kSummaryCsvVersion = "# umni-crl summary v1";

std::string trial_csv_header();
std::string trial_csv_row(const ExperimentConfig& config, const TrialResult& r);
void write_trials_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<TrialResult>& trials);
std::string summary_csv_header();
std::string summary_csv_row(const ExperimentConfig& config, const BatchSummary& s);
void write_summary_csv(std::ostream& os, const ExperimentConfig& config, const BatchSummary& s);

/// Structured-text config (JSON). Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace umni
