#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "locbias/budget.hpp"
#include "locbias/coverage.hpp"
#include "locbias/harness.hpp"
#include "locbias/strategies.hpp"

namespace locbias {

struct TrialOptions {
  std::size_t max_test_length = 100;
  // Store every failing test instead of one exemplar per signature.
  bool keep_all_failures = false;
  // Checked after every action; returning true ends the trial early.
  std::function<bool(const ProbeRegistry&, std::uint64_t actions)> stop_when;
};

struct TrialResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::uint64_t actions = 0;
  std::uint64_t tests_completed = 0;
  bool coverage_on = true;
  CoverageSnapshot coverage;  // empty when coverage_on is false
  std::set<FaultSignature> signatures;
  std::vector<std::pair<FaultSignature, TestCase>> failing_tests;
  bool stopped_early = false;
  double wall_seconds = 0;

  bool detected_fault() const { return !signatures.empty(); }
};

// Drives the strategy over fresh tests until the budget is spent. Tests end
// at max_test_length steps, at the first failure, or when the strategy has no
// enabled step. Deterministic for action budgets.
TrialResult run_trial(const Harness& harness, const StrategyConfig& strategy,
                      const Budget& budget, bool coverage_on, std::uint64_t seed,
                      const TrialOptions& options = {});

struct OverheadRep {
  std::uint64_t seed;
  std::uint64_t actions_with;     // coverage on
  std::uint64_t actions_without;  // coverage off
  double ratio() const;
};

struct OverheadReport {
  std::vector<OverheadRep> reps;
  double seconds = 0;
  double mean_ratio() const;
};

// Paired same-seed, same-duration trials with and without coverage probes.
// The ratio is actions without / actions with.
OverheadReport measure_overhead(const Harness& harness, const StrategyConfig& strategy,
                                double seconds, std::size_t repetitions = 10,
                                std::uint64_t base_seed = 0,
                                std::size_t max_test_length = 100);

void write_overhead_report(std::ostream& out, const std::string& harness_id,
                           const std::string& strategy, const OverheadReport& report);

// "trial,strategy,branches,statements,actions,faults"
void write_trial_csv_header(std::ostream& out);
void write_trial_csv_row(std::ostream& out, std::size_t trial, const TrialResult& result);

// File name for a failing test exemplar, derived from its signature.
std::string failure_file_name(const FaultSignature& signature);

}  // namespace locbias
