#include "locbias/runner.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <memory>
#include <ostream>

namespace locbias {

namespace {

using Clock = std::chrono::steady_clock;

// Consecutive tests that could not execute a single step before the trial
// gives up.
constexpr int kMaxEmptyTests = 1000;

// A trial that can be driven in pieces. run() executes actions until the
// caller's predicate says stop, and a later call resumes mid-test.
class Trial {
 public:
  Trial(const Harness& harness, const StrategyConfig& strategy, bool coverage_on,
        std::uint64_t seed, const TrialOptions& options)
      : options_(options),
        rng_(seed),
        registry_(coverage_on, harness.branch_probes(), harness.stmt_probes()),
        // Without coverage the probes see no registry at all, so an
        // uninstrumented run pays only the null check.
        state_(harness, coverage_on ? &registry_ : nullptr),
        strat_(make_strategy(strategy, harness, options.max_test_length)) {
    result_.strategy = strategy.name();
    result_.seed = seed;
    result_.coverage_on = coverage_on;
    state_.trace().set_tracing(false);
    current_.seed = seed;
  }

  bool over() const { return over_; }
  std::uint64_t actions() const { return result_.actions; }

  template <class Exhausted>
  void run(Exhausted&& exhausted) {
    while (!over_) {
      if (!in_test_) {
        if (exhausted()) return;
        state_.reset();
        registry_.begin_test();
        current_.steps.clear();
        strat_->begin_test(state_, rng_);
        in_test_ = true;
      }
      if (state_.step_count() >= options_.max_test_length) {
        end_test();
        continue;
      }
      if (exhausted()) return;
      auto step = strat_->next_step(state_, rng_);
      if (!step) {
        end_test();
        continue;
      }
      const StepOutcome outcome = state_.execute(*step);
      ++result_.actions;
      current_.steps.push_back(std::move(*step));

      if (outcome.status != StepStatus::ok) {
        const FaultSignature& sig = *outcome.signature;
        const bool is_new = result_.signatures.insert(sig).second;
        if (is_new || options_.keep_all_failures) result_.failing_tests.emplace_back(sig, current_);
      }
      if (options_.stop_when && options_.stop_when(registry_, result_.actions)) {
        result_.stopped_early = true;
        over_ = true;
        return;
      }
      if (outcome.status != StepStatus::ok) end_test();
    }
  }

  // A test still in progress is cut short and not counted.
  TrialResult finish(double wall_seconds) {
    if (result_.coverage_on) result_.coverage = registry_.snapshot();
    result_.wall_seconds = wall_seconds;
    return std::move(result_);
  }

 private:
  void end_test() {
    in_test_ = false;
    if (current_.steps.empty()) {
      if (++empty_tests_ >= kMaxEmptyTests) {
        over_ = true;
        return;
      }
    } else {
      empty_tests_ = 0;
    }
    ++result_.tests_completed;
    strat_->end_test(current_, registry_.test_hits());
  }

  const TrialOptions& options_;
  Rng rng_;
  ProbeRegistry registry_;
  HarnessState state_;
  std::unique_ptr<Strategy> strat_;
  TrialResult result_;
  TestCase current_;
  int empty_tests_ = 0;
  bool in_test_ = false;
  bool over_ = false;
};

Clock::duration to_duration(double seconds) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

// Wall-clock length of one slice when two trials share the clock.
constexpr auto kOverheadSlice = std::chrono::milliseconds(20);

}  // namespace

TrialResult run_trial(const Harness& harness, const StrategyConfig& strategy,
                      const Budget& budget, bool coverage_on, std::uint64_t seed,
                      const TrialOptions& options) {
  const auto started = Clock::now();
  const auto deadline = started + to_duration(budget.amount);
  Trial trial(harness, strategy, coverage_on, seed, options);

  const std::uint64_t action_limit = budget.is_actions() ? budget.action_limit() : 0;
  bool out_of_time = false;
  trial.run([&] {
    if (budget.is_actions()) return trial.actions() >= action_limit;
    // Reading the clock every action would dominate cheap SUTs.
    if ((trial.actions() & 15) == 0 && !out_of_time) out_of_time = Clock::now() >= deadline;
    return out_of_time;
  });
  return trial.finish(std::chrono::duration<double>(Clock::now() - started).count());
}

double OverheadRep::ratio() const {
  if (actions_with == 0) return 0.0;
  return static_cast<double>(actions_without) / static_cast<double>(actions_with);
}

double OverheadReport::mean_ratio() const {
  if (reps.empty()) return 0.0;
  double total = 0;
  for (const auto& r : reps) total += r.ratio();
  return total / static_cast<double>(reps.size());
}

OverheadReport measure_overhead(const Harness& harness, const StrategyConfig& strategy,
                                double seconds, std::size_t repetitions, std::uint64_t base_seed,
                                std::size_t max_test_length) {
  if (repetitions == 0) throw std::invalid_argument("overhead: repetitions must be >= 1");
  const auto per_side = to_duration(Budget::seconds(seconds).amount);
  TrialOptions options;
  options.max_test_length = max_test_length;

  OverheadReport report;
  report.seconds = seconds;
  for (std::size_t i = 0; i < repetitions; ++i) {
    OverheadRep rep{base_seed + i, 0, 0};
    // The two sides take turns in short slices until each has had its share
    // of the clock, so drift in host speed hits both alike.
    Trial with(harness, strategy, true, rep.seed, options);
    Trial without(harness, strategy, false, rep.seed, options);
    Trial* sides[2] = {&with, &without};
    Clock::duration used[2] = {};
    for (std::size_t turn = i;; ++turn) {
      bool progressed = false;
      for (int k = 0; k < 2; ++k) {
        const int side = static_cast<int>((turn + k) % 2);
        Trial& t = *sides[side];
        if (t.over() || used[side] >= per_side) continue;
        progressed = true;
        const auto begin = Clock::now();
        const auto slice_end = begin + std::min<Clock::duration>(kOverheadSlice, per_side - used[side]);
        bool out_of_time = false;
        t.run([&] {
          if ((t.actions() & 15) == 0 && !out_of_time) out_of_time = Clock::now() >= slice_end;
          return out_of_time;
        });
        used[side] += Clock::now() - begin;
      }
      if (!progressed) break;
    }
    rep.actions_with = with.actions();
    rep.actions_without = without.actions();
    report.reps.push_back(rep);
  }
  return report;
}

void write_overhead_report(std::ostream& out, const std::string& harness_id,
                           const std::string& strategy, const OverheadReport& report) {
  out << "| harness | strategy | rep | seed | actions with coverage | actions without coverage | "
         "without / with |\n";
  out << "|---|---|---|---|---|---|---|\n";
  out << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < report.reps.size(); ++i) {
    const auto& r = report.reps[i];
    out << "| " << harness_id << " | " << strategy << " | " << i + 1 << " | " << r.seed << " | "
        << r.actions_with << " | " << r.actions_without << " | " << r.ratio() << " |\n";
  }
  out << "\nmean ratio (actions without / actions with) over " << report.reps.size()
      << " reps of " << report.seconds << " s: " << report.mean_ratio() << '\n';
  out << std::defaultfloat;
}

void write_trial_csv_header(std::ostream& out) {
  out << "trial,strategy,branches,statements,actions,faults\n";
}

void write_trial_csv_row(std::ostream& out, std::size_t trial, const TrialResult& result) {
  out << trial << ',' << result.strategy << ',';
  if (result.coverage_on) {
    out << result.coverage.branches() << ',' << result.coverage.statements();
  } else {
    out << "-,-";
  }
  out << ',' << result.actions << ',' << result.signatures.size() << '\n';
}

std::string failure_file_name(const FaultSignature& signature) {
  std::string name = signature.property + "__" + signature.category;
  for (char& c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '_' || c == '-' || c == '.';
    if (!keep) c = '_';
  }
  return name + ".test";
}

}  // namespace locbias
