#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/budget.hpp"
#include "locbias/harness.hpp"
#include "locbias/runner.hpp"
#include "locbias/strategies.hpp"

namespace locbias {

// Bad experiment configuration (file syntax, unknown keys, invalid values).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Results whose p-value is below this are reported as significant.
inline constexpr double kSignificance = 0.05;

struct ExperimentConfig {
  std::string harness_id;
  // Strategies in report order. Labels must be unique.
  std::vector<StrategyConfig> strategies;
  std::size_t trials = 100;
  Budget budget = Budget::actions(10000);
  std::uint64_t base_seed = 0;
  std::string baseline = "random";
  bool coverage = true;
  std::size_t max_test_length = 100;
  std::size_t jobs = 1;
  // Runs of the baseline per "=branch" estimate; 0 skips the metric.
  std::size_t equal_budget_runs = 0;
  // Cap on each "=branch" run, as a multiple of the action budget.
  std::uint64_t equal_budget_cap_factor = 100;

  // Throws ConfigError.
  void validate() const;
};

struct MetricSummary {
  double mean = 0;
  double median = 0;
};

// Strategy metric against the baseline's.
struct Comparison {
  double u = 0;  // Mann-Whitney U of the strategy sample
  double p = 1;
  int direction = 0;  // sign of (strategy mean - baseline mean)
  // Percent change of the mean; nullopt when the baseline mean is 0.
  std::optional<double> gain_percent;

  bool significant() const { return p < kSignificance; }
};

struct EqualBudget {
  double target_branches = 0;
  std::optional<double> mean_actions;  // over runs that reached the target
  std::size_t runs = 0;
  std::size_t dnf = 0;  // runs that hit the cap first
};

struct StrategySummary {
  std::string strategy;
  std::optional<MetricSummary> branches;  // absent with coverage off
  std::optional<MetricSummary> statements;
  MetricSummary faults;  // distinct signatures per trial
  double detection_rate = 0;  // fraction of trials with at least one signature
  std::uint64_t actions = 0;  // total over trials
  std::optional<Comparison> branches_vs_baseline;
  std::optional<Comparison> statements_vs_baseline;
  std::optional<Comparison> faults_vs_baseline;
  std::optional<EqualBudget> equal_branch;
};

struct ExperimentReport {
  std::string harness_id;
  std::string baseline;
  std::size_t trials = 0;
  std::string budget;
  bool coverage = true;
  // Strategy-major, then seed order.
  std::vector<TrialResult> results;
  // Per result: percent of the best branch / statement count in any trial.
  std::vector<double> branches_normalized;
  std::vector<double> statements_normalized;
  std::vector<StrategySummary> summaries;
};

ExperimentReport run_experiment(const Harness& harness, const ExperimentConfig& config);

// Runs the baseline from fresh seeds until its branch count reaches `target`
// (rounded up) or `cap_actions` actions pass.
EqualBudget equal_coverage_budget(const Harness& harness, const StrategyConfig& baseline,
                                  double target_branches, std::size_t runs = 30,
                                  std::uint64_t cap_actions = 1'000'000,
                                  std::uint64_t base_seed = 0,
                                  std::size_t max_test_length = 100);

// Summary rows: strategy, metric, mean, median, gain, U, p, significant.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
// Human-readable tables. Gains that are not significant appear in italics.
void write_report_markdown(std::ostream& out, const ExperimentReport& report);
// One row per trial, with normalized coverage, for external plotting.
void write_trials_csv(std::ostream& out, const ExperimentReport& report);

// Contents of an experiment file: `key = value` lines, `#` comments.
struct ExperimentFile {
  std::string harness;
  bench::Settings settings;  // bench.* keys
  std::vector<std::string> strategies;
  std::size_t trials = 100;
  std::optional<std::uint64_t> budget_actions;
  std::optional<double> budget_seconds;
  std::uint64_t base_seed = 0;
  std::string baseline = "random";
  bool coverage = true;
  std::size_t max_test_length = 100;
  std::size_t jobs = 1;
  std::optional<std::string> locmap;  // path, relative to the file
  std::uint64_t sample_budget = 10000;
  std::uint64_t sample_seed = 0;
  std::size_t equal_budget_runs = 0;
  std::uint64_t equal_budget_cap_factor = 100;
  double swarm_disable_prob = 0.5;
  GaParams ga;
  std::optional<std::string> out_csv;
  std::optional<std::string> out_markdown;
  std::optional<std::string> out_trials;
};

// Throws ConfigError.
ExperimentFile parse_experiment_file(std::istream& in);

// Resolves strategy names against the harness, loading the LOC map from
// `locmap` (relative to base_dir) or sampling one when a LOC strategy needs
// it. Throws ConfigError.
ExperimentConfig build_experiment(const ExperimentFile& file, const Harness& harness,
                                  const std::filesystem::path& base_dir,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace locbias
