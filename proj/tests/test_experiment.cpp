#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "locbias/bench/bench.hpp"
#include "locbias/experiment.hpp"

using namespace locbias;

namespace {

StrategyConfig named(StrategyKind kind, std::string label = {}) {
  StrategyConfig c;
  c.kind = kind;
  c.label = std::move(label);
  return c;
}

ExperimentConfig small_config(std::vector<StrategyConfig> strategies, std::size_t trials = 8,
                              std::uint64_t budget = 1500) {
  ExperimentConfig c;
  c.harness_id = "avl";
  c.strategies = std::move(strategies);
  c.trials = trials;
  c.budget = Budget::actions(budget);
  return c;
}

ExperimentFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_file(in);
}

std::string render(const ExperimentReport& r) {
  std::ostringstream out;
  write_report_csv(out, r);
  write_report_markdown(out, r);
  write_trials_csv(out, r);
  return out.str();
}

}  // namespace

TEST(ExperimentConfig, Validation) {
  auto c = small_config({named(StrategyKind::random)});
  EXPECT_NO_THROW(c.validate());
  c.trials = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config({named(StrategyKind::swarm)});
  EXPECT_THROW(c.validate(), ConfigError);  // no baseline
  c = small_config({named(StrategyKind::random), named(StrategyKind::swarm, "random")});
  EXPECT_THROW(c.validate(), ConfigError);  // duplicate name
  c = small_config({named(StrategyKind::random), named(StrategyKind::loc)});
  EXPECT_THROW(c.validate(), ConfigError);  // loc without a table
}

TEST(RunExperiment, SelfComparisonShowsNoDifference) {
  auto h = bench::avl_harness();
  const auto report =
      run_experiment(*h, small_config({named(StrategyKind::random), named(StrategyKind::random, "again")}));
  ASSERT_EQ(report.summaries.size(), 2u);
  const auto& again = report.summaries[1];
  for (const auto& c : {again.branches_vs_baseline, again.statements_vs_baseline}) {
    ASSERT_TRUE(c);
    EXPECT_DOUBLE_EQ(c->p, 1.0);
    EXPECT_DOUBLE_EQ(*c->gain_percent, 0.0);
    EXPECT_EQ(c->direction, 0);
    EXPECT_FALSE(c->significant());
  }
  EXPECT_FALSE(report.summaries[0].branches_vs_baseline);
}

TEST(RunExperiment, SeedsAreSharedAcrossStrategies) {
  auto h = bench::heap_harness();
  auto c = small_config({named(StrategyKind::random), named(StrategyKind::swarm)}, 5, 300);
  c.base_seed = 100;
  const auto report = run_experiment(*h, c);
  ASSERT_EQ(report.results.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(report.results[i].seed, 100 + i % 5);
    EXPECT_EQ(report.results[i].strategy, i < 5 ? "random" : "swarm");
  }
}

TEST(RunExperiment, NormalizationIsPercentOfBestTrial) {
  auto h = bench::avl_harness();
  const auto report =
      run_experiment(*h, small_config({named(StrategyKind::random), named(StrategyKind::swarm)}, 6, 400));
  double best = 0;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const double v = report.branches_normalized[i];
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
    best = std::max(best, v);
  }
  EXPECT_DOUBLE_EQ(best, 100.0);
  EXPECT_DOUBLE_EQ(*std::max_element(report.statements_normalized.begin(), report.statements_normalized.end()),
                   100.0);
}

TEST(RunExperiment, ReproducibleAndIndependentOfJobs) {
  auto h = bench::avl_harness();
  const auto table = loc_distribution(sample_loc(*h, 2000, 0));
  auto c = small_config({named(StrategyKind::random), compose_loc(StrategyKind::random, table)}, 6);
  const std::string once = render(run_experiment(*h, c));
  EXPECT_EQ(render(run_experiment(*h, c)), once);
  c.jobs = 4;
  EXPECT_EQ(render(run_experiment(*h, c)), once);
}

TEST(RunExperiment, CoverageOffSkipsCoverageStatistics) {
  auto h = bench::avl_harness();
  auto c = small_config({named(StrategyKind::random), named(StrategyKind::swarm)}, 4, 300);
  c.coverage = false;
  const auto report = run_experiment(*h, c);
  EXPECT_TRUE(report.branches_normalized.empty());
  EXPECT_FALSE(report.summaries[1].branches);
  EXPECT_FALSE(report.summaries[1].branches_vs_baseline);
  EXPECT_TRUE(report.summaries[1].faults_vs_baseline);
  const std::string text = render(report);
  EXPECT_NE(text.find("random,0,0,300,"), std::string::npos);
  EXPECT_NE(text.find(",-,-,"), std::string::npos);
}

TEST(RunExperiment, SignificanceMarkup) {
  ExperimentReport r;
  r.harness_id = "h";
  r.baseline = "random";
  r.trials = 2;
  r.budget = "10 actions";
  StrategySummary base;
  base.strategy = "random";
  base.branches = MetricSummary{10, 10};
  base.statements = MetricSummary{20, 20};
  StrategySummary other = base;
  other.strategy = "loc";
  other.branches_vs_baseline = Comparison{1, 0.01, 1, 25.0};
  other.statements_vs_baseline = Comparison{1, 0.2, -1, -5.0};
  other.faults_vs_baseline = Comparison{1, 1.0, 0, std::nullopt};
  other.equal_branch = EqualBudget{12.5, 4000.0, 30, 2};
  r.summaries = {base, other};
  std::ostringstream md;
  write_report_markdown(md, r);
  EXPECT_NE(md.str().find("| loc | +25.00% | *-5.00%* | N/A | 4000.0 (2/30 DNF) |"), std::string::npos)
      << md.str();
  EXPECT_NE(md.str().find("| random | - | - | - | - |"), std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_NE(csv.str().find("loc,branches,10.0000,10.0000,25.0000,1.0,0.01,yes\n"), std::string::npos)
      << csv.str();
  EXPECT_NE(csv.str().find("loc,statements,20.0000,20.0000,-5.0000,1.0,0.2,no\n"), std::string::npos);
  EXPECT_NE(csv.str().find("loc,equal_branch_actions,4000.0,,,,,\n"), std::string::npos);
}

TEST(EqualBudget, Corners) {
  auto h = bench::avl_harness();
  const auto zero = equal_coverage_budget(*h, {}, 0.0, 5);
  EXPECT_EQ(zero.mean_actions, 0.0);
  EXPECT_EQ(zero.dnf, 0u);
  const auto unreachable = equal_coverage_budget(*h, {}, static_cast<double>(h->branch_probes()) + 1, 7);
  EXPECT_EQ(unreachable.dnf, 7u);
  EXPECT_FALSE(unreachable.mean_actions);
  const auto defaults = equal_coverage_budget(*h, {}, 5.0);
  EXPECT_EQ(defaults.runs, 30u);
}

TEST(EqualBudget, ReachesATargetAndCountsCaps) {
  auto h = bench::avl_harness();
  const auto easy = equal_coverage_budget(*h, {}, 10.5, 10, 100000);
  EXPECT_EQ(easy.dnf, 0u);
  ASSERT_TRUE(easy.mean_actions);
  EXPECT_GT(*easy.mean_actions, 0.0);
  // Matches individual stop-when trials.
  TrialOptions o;
  o.stop_when = [](const ProbeRegistry& r, std::uint64_t) { return r.branch_count() >= 11; };
  double total = 0;
  for (std::uint64_t s = 0; s < 10; ++s) total += static_cast<double>(run_trial(*h, {}, Budget::actions(100000), true, s, o).actions);
  EXPECT_DOUBLE_EQ(*easy.mean_actions, total / 10);
  const auto capped = equal_coverage_budget(*h, {}, static_cast<double>(h->branch_probes()), 3, 5);
  EXPECT_EQ(capped.dnf, 3u);
}

TEST(RunExperiment, EqualBranchColumn) {
  auto h = bench::avl_harness();
  auto c = small_config({named(StrategyKind::random), named(StrategyKind::swarm)}, 4, 400);
  c.equal_budget_runs = 3;
  const auto report = run_experiment(*h, c);
  ASSERT_TRUE(report.summaries[1].equal_branch);
  EXPECT_EQ(report.summaries[1].equal_branch->runs, 3u);
  EXPECT_DOUBLE_EQ(report.summaries[1].equal_branch->target_branches, report.summaries[1].branches->mean);
  EXPECT_FALSE(report.summaries[0].equal_branch);
}

TEST(ExperimentFile, ParsesAllKeys) {
  const auto f = parse(R"(
# campaign
harness = "avl"
strategies = [random, "loc", swarm-loc]   # trailing comment
trials = 20
budget_actions = 5000
base_seed = 7
baseline = random
coverage = off
max_test_length = 50
jobs = 3
locmap = "maps/avl #1.json"
sample_budget = 300
sample_seed = 2
equal_budget_runs = 4
equal_budget_cap_factor = 10
swarm_disable_prob = 0.25
ga.population_cap = 20
ga.elite_k = 4
ga.fresh_prob = 0.3
ga.mutate_weight = 2
ga.crossover_weight = 0
ga.extend_weight = 1.5
out_csv = a.csv
out_markdown = a.md
out_trials = t.csv
bench.avl.fault.rotation = off
)");
  EXPECT_EQ(f.harness, "avl");
  EXPECT_EQ(f.strategies, (std::vector<std::string>{"random", "loc", "swarm-loc"}));
  EXPECT_EQ(f.trials, 20u);
  EXPECT_EQ(f.budget_actions, 5000u);
  EXPECT_EQ(f.base_seed, 7u);
  EXPECT_FALSE(f.coverage);
  EXPECT_EQ(f.max_test_length, 50u);
  EXPECT_EQ(f.jobs, 3u);
  EXPECT_EQ(f.locmap, "maps/avl #1.json");
  EXPECT_EQ(f.sample_budget, 300u);
  EXPECT_EQ(f.equal_budget_runs, 4u);
  EXPECT_EQ(f.equal_budget_cap_factor, 10u);
  EXPECT_DOUBLE_EQ(f.swarm_disable_prob, 0.25);
  EXPECT_EQ(f.ga.population_cap, 20u);
  EXPECT_EQ(f.ga.elite_k, 4u);
  EXPECT_DOUBLE_EQ(f.ga.fresh_prob, 0.3);
  EXPECT_DOUBLE_EQ(f.ga.crossover_weight, 0);
  EXPECT_DOUBLE_EQ(f.ga.extend_weight, 1.5);
  EXPECT_EQ(f.out_csv, "a.csv");
  EXPECT_EQ(f.settings.at("bench.avl.fault.rotation"), "off");
}

TEST(ExperimentFile, Errors) {
  EXPECT_THROW(parse("strategies = random\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\nharness = heap\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\ntrials = many\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\ntrials = -3\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\ncoverage = maybe\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\njust a line\n"), ConfigError);
  EXPECT_THROW(parse("harness = avl\nstrategies = random\nbudget_actions = 5\nbudget_seconds = 1\n"),
               ConfigError);
}

TEST(BuildExperiment, LoadsLocMapRelativeToBaseDir) {
  auto h = bench::avl_harness();
  const auto dir = std::filesystem::temp_directory_path() / "locbias_build_experiment";
  std::filesystem::create_directories(dir / "maps");
  save_locmap(sample_loc(*h, 1000, 4), (dir / "maps" / "avl.json").string());

  const auto f = parse("harness = avl\nstrategies = random, loc, ga-loc\nlocmap = maps/avl.json\ntrials = 3\n");
  std::vector<std::string> warnings;
  const auto c = build_experiment(f, *h, dir, &warnings);
  EXPECT_TRUE(warnings.empty());
  ASSERT_EQ(c.strategies.size(), 3u);
  ASSERT_TRUE(c.strategies[1].table);
  EXPECT_EQ(c.strategies[1].table->probs, c.strategies[2].table->probs);
  EXPECT_EQ(c.trials, 3u);
  EXPECT_EQ(c.budget.action_limit(), 10000u);

  const auto missing = parse("harness = avl\nstrategies = random, loc\nlocmap = nope.json\n");
  EXPECT_THROW(build_experiment(missing, *h, dir), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(BuildExperiment, SamplesWhenNoMapIsGiven) {
  auto h = bench::avl_harness();
  const auto f = parse("harness = avl\nstrategies = random, loc\nsample_budget = 800\nsample_seed = 3\n");
  const auto c = build_experiment(f, *h, ".");
  EXPECT_EQ(c.strategies[1].table->probs, loc_distribution(sample_loc(*h, 800, 3)).probs);
}

TEST(BuildExperiment, RejectsUnknownStrategiesAndBadBudgets) {
  auto h = bench::avl_harness();
  EXPECT_THROW(build_experiment(parse("harness = avl\nstrategies = random, tabu\n"), *h, "."), ConfigError);
  EXPECT_THROW(build_experiment(parse("harness = avl\nstrategies = random\nbudget_actions = 0\n"), *h, "."),
               ConfigError);
  EXPECT_THROW(build_experiment(parse("harness = avl\nstrategies = swarm\n"), *h, "."), ConfigError);
}
