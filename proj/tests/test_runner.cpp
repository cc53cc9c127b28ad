#include <gtest/gtest.h>
#include <algorithm>

#include <sstream>

#include "locbias/bench/bench.hpp"
#include "locbias/runner.hpp"
#include "support/toy_harness.hpp"

using namespace locbias;

namespace {

StrategyConfig random_strategy() { return StrategyConfig{}; }

StrategyConfig strategy(StrategyKind kind) {
  StrategyConfig c;
  c.kind = kind;
  return c;
}

void expect_same(const TrialResult& a, const TrialResult& b) {
  EXPECT_EQ(a.strategy, b.strategy);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.tests_completed, b.tests_completed);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_EQ(a.signatures, b.signatures);
  ASSERT_EQ(a.failing_tests.size(), b.failing_tests.size());
  for (std::size_t i = 0; i < a.failing_tests.size(); ++i) {
    EXPECT_EQ(a.failing_tests[i].first, b.failing_tests[i].first);
    EXPECT_EQ(a.failing_tests[i].second, b.failing_tests[i].second);
  }
}

// Only value-init and an empty SUT call: probes never fire.
std::shared_ptr<Harness> probe_free_harness() {
  auto h = std::make_shared<Harness>("quiet");
  h->add_pool("int", 2);
  h->add_class({.id = "int_init", .kind = ActionKind::value_init, .produces = "int", .domain_size = 3,
                .executor = [](StepContext& ctx) { ctx.produce(static_cast<int>(ctx.choice())); }});
  h->add_class({.id = "touch", .consumes = {"int"}, .executor = [](StepContext&) {}});
  return h;
}

}  // namespace

TEST(RunTrial, SingleActionBudget) {
  auto h = toy::toy_harness();
  const auto r = run_trial(*h, random_strategy(), Budget::actions(1), true, 0);
  EXPECT_EQ(r.actions, 1u);
  EXPECT_EQ(r.tests_completed, 0u);
}

TEST(RunTrial, ActionBudgetIsExact) {
  auto h = bench::heap_harness();
  for (auto kind : {StrategyKind::random, StrategyKind::swarm, StrategyKind::ga}) {
    const auto r = run_trial(*h, strategy(kind), Budget::actions(2345), true, 3);
    EXPECT_EQ(r.actions, 2345u) << to_string(kind);
  }
}

TEST(RunTrial, DeterministicPerSeed) {
  auto h = bench::avl_harness();
  const auto table = loc_distribution(sample_loc(*h, 2000, 0));
  for (const auto& config : {random_strategy(), compose_loc(StrategyKind::random, table),
                             strategy(StrategyKind::swarm), compose_loc(StrategyKind::ga, table)}) {
    const auto a = run_trial(*h, config, Budget::actions(3000), true, 42);
    const auto b = run_trial(*h, config, Budget::actions(3000), true, 42);
    expect_same(a, b);
  }
  const auto c = run_trial(*h, random_strategy(), Budget::actions(3000), true, 43);
  const auto d = run_trial(*h, random_strategy(), Budget::actions(3000), true, 42);
  EXPECT_NE(c.coverage.branch_ids == d.coverage.branch_ids && c.tests_completed == d.tests_completed &&
                c.signatures == d.signatures && c.failing_tests.size() == d.failing_tests.size(),
            c.coverage.stmt_ids != d.coverage.stmt_ids);
}

TEST(RunTrial, TestsRespectMaxLength) {
  auto h = bench::sortedlist_harness({{"bench.sortedlist.fault.slice", "off"},
                                      {"bench.sortedlist.fault.union", "off"}});
  TrialOptions o;
  o.max_test_length = 10;
  const auto r = run_trial(*h, random_strategy(), Budget::actions(1000), true, 1, o);
  EXPECT_TRUE(r.signatures.empty());
  EXPECT_EQ(r.tests_completed, 100u);
}

TEST(RunTrial, CoverageOffReportsNothing) {
  auto h = bench::avl_harness();
  const auto r = run_trial(*h, random_strategy(), Budget::actions(500), false, 1);
  EXPECT_EQ(r.coverage, CoverageSnapshot{});
  EXPECT_FALSE(r.coverage_on);
  std::ostringstream row;
  write_trial_csv_row(row, 4, r);
  EXPECT_EQ(row.str(), "4,random,-,-,500," + std::to_string(r.signatures.size()) + "\n");
}

TEST(RunTrial, CoverageStaysWithinDeclaredProbes) {
  for (const auto& id : bench::bench_ids()) {
    auto h = bench::make_bench_harness(id);
    const auto r = run_trial(*h, random_strategy(), Budget::actions(3000), true, 2);
    EXPECT_GT(r.coverage.branches(), 0u) << id;
    EXPECT_LE(r.coverage.branches(), h->branch_probes()) << id;
    EXPECT_LE(r.coverage.statements(), h->stmt_probes()) << id;
    if (!r.coverage.branch_ids.empty()) {
      EXPECT_LT(r.coverage.branch_ids.back(), h->branch_probes()) << id;
    }
    if (!r.coverage.stmt_ids.empty()) {
      EXPECT_LT(r.coverage.stmt_ids.back(), h->stmt_probes()) << id;
    }
  }
}

TEST(RunTrial, SignaturesAreDedupedWithOneExemplarEach) {
  auto h = toy::toy_harness();
  const auto r = run_trial(*h, random_strategy(), Budget::actions(2000), true, 5);
  EXPECT_EQ(r.signatures, (std::set<FaultSignature>{{"boom", "boom"}}));
  EXPECT_EQ(r.failing_tests.size(), r.signatures.size());

  TrialOptions all;
  all.keep_all_failures = true;
  const auto r2 = run_trial(*h, random_strategy(), Budget::actions(2000), true, 5, all);
  EXPECT_EQ(r2.signatures, r.signatures);
  EXPECT_GT(r2.failing_tests.size(), r.failing_tests.size());
}

TEST(RunTrial, ExemplarsReplayToTheirSignature) {
  for (const auto& id : {"avl", "heap", "sortedlist"}) {
    auto h = bench::make_bench_harness(id);
    const auto r = run_trial(*h, random_strategy(), Budget::actions(10000), true, 8);
    for (const auto& [sig, test] : r.failing_tests) {
      const auto replayed = replay(*h, test);
      ASSERT_TRUE(replayed.signature) << id;
      EXPECT_EQ(*replayed.signature, sig) << id;
      EXPECT_EQ(replayed.steps_executed, test.steps.size()) << id;
    }
  }
}

TEST(RunTrial, StopWhenEndsEarly) {
  auto h = bench::avl_harness();
  TrialOptions o;
  o.stop_when = [](const ProbeRegistry& reg, std::uint64_t) { return reg.branch_count() >= 10; };
  const auto r = run_trial(*h, random_strategy(), Budget::actions(100000), true, 1, o);
  EXPECT_TRUE(r.stopped_early);
  // One step may hit several new branches at once.
  EXPECT_GE(r.coverage.branches(), 10u);
  EXPECT_LT(r.coverage.branches(), 20u);
  EXPECT_LT(r.actions, 100000u);
}

TEST(RunTrial, SecondsBudgetTerminates) {
  auto h = bench::heap_harness();
  const auto r = run_trial(*h, random_strategy(), Budget::seconds(0.05), true, 1);
  EXPECT_GT(r.actions, 0u);
  EXPECT_LT(r.wall_seconds, 1.0);
}

TEST(RunTrial, HarnessWithNothingToDoStops) {
  Harness h("idle");
  h.add_pool("never", 1);
  h.add_class({.id = "use", .consumes = {"never"}, .executor = [](StepContext&) {}});
  const auto r = run_trial(h, random_strategy(), Budget::actions(10), true, 0);
  EXPECT_EQ(r.actions, 0u);
}

TEST(Overhead, ProbeFreeHarnessIsNearOne) {
  auto h = probe_free_harness();
  const auto report = measure_overhead(*h, random_strategy(), 0.1, 7);
  ASSERT_EQ(report.reps.size(), 7u);
  // Median, since one rep can lose its time slice to a neighbouring process.
  std::vector<double> ratios;
  for (const auto& rep : report.reps) ratios.push_back(rep.ratio());
  std::nth_element(ratios.begin(), ratios.begin() + 3, ratios.end());
  EXPECT_NEAR(ratios[3], 1.0, 0.1);
}

TEST(Overhead, ReportFormat) {
  OverheadReport report;
  report.seconds = 2;
  report.reps = {{0, 100, 150}, {1, 200, 200}};
  EXPECT_DOUBLE_EQ(report.mean_ratio(), 1.25);
  std::ostringstream out;
  write_overhead_report(out, "sortedlist", "random", report);
  EXPECT_EQ(out.str(),
            "| harness | strategy | rep | seed | actions with coverage | actions without coverage | "
            "without / with |\n"
            "|---|---|---|---|---|---|---|\n"
            "| sortedlist | random | 1 | 0 | 100 | 150 | 1.500 |\n"
            "| sortedlist | random | 2 | 1 | 200 | 200 | 1.000 |\n"
            "\nmean ratio (actions without / actions with) over 2 reps of 2.000 s: 1.250\n");
  EXPECT_THROW(measure_overhead(*probe_free_harness(), random_strategy(), 0.1, 0), std::invalid_argument);
}

TEST(Csv, HeaderAndFailureNames) {
  std::ostringstream out;
  write_trial_csv_header(out);
  EXPECT_EQ(out.str(), "trial,strategy,branches,statements,actions,faults\n");
  EXPECT_EQ(failure_file_name({"check_balanced", "assertion"}), "check_balanced__assertion.test");
  EXPECT_EQ(failure_file_name({"decode", "bad/escape here"}), "decode__bad_escape_here.test");
}
