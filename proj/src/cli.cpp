#include "locbias/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "locbias/bench/bench.hpp"
#include "locbias/experiment.hpp"
#include "locbias/loc_map.hpp"
#include "locbias/runner.hpp"
#include "locbias/strategies.hpp"
#include "locbias/testcase_io.hpp"

namespace locbias {

namespace {

namespace fs = std::filesystem;

// Ends a command with an exit code and a diagnostic.
struct Failure {
  int code;
  std::string message;
};

bench::Settings parse_sets(const std::vector<std::string>& sets) {
  bench::Settings out;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{kExitConfig, "--set expects key=value, got '" + kv + "'"};
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

std::shared_ptr<const Harness> load_harness(const std::string& id, const bench::Settings& settings) {
  try {
    return bench::make_bench_harness(id, settings);
  } catch (const bench::UnknownHarness& e) {
    throw Failure{kExitConfig, e.what()};
  } catch (const bench::SettingsError& e) {
    throw Failure{kExitConfig, e.what()};
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitUnwritable, "cannot write '" + path.string() + "'"};
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Failure{kExitUnwritable, "cannot write '" + path.string() + "'"};
}

ProbabilityTable read_table(const std::string& path, const Harness& harness, std::ostream& err) {
  try {
    auto loaded = load_locmap(path, harness);
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
    return loc_distribution(loaded.map);
  } catch (const LocMapError& e) {
    throw Failure{kExitConfig, e.what()};
  }
}

StrategyConfig make_strategy_config(const std::string& name, const std::optional<std::string>& locmap,
                                    const Harness& harness, std::ostream& err) {
  const auto kind = parse_strategy_kind(name);
  if (!kind) throw Failure{kExitConfig, "unknown strategy '" + name + "'"};
  StrategyConfig config;
  config.kind = *kind;
  if (uses_loc(*kind)) {
    if (!locmap) throw Failure{kExitConfig, "strategy '" + name + "' needs --locmap"};
    config.table = read_table(*locmap, harness, err);
  }
  return config;
}

// The harness plus the effective value of every fault flag, so a replay
// rebuilds the same harness.
std::map<std::string, std::string> harness_meta(const std::string& id, const bench::Settings& settings) {
  std::map<std::string, std::string> meta{{"harness", id}};
  for (const auto& f : bench::bench_faults(id)) {
    meta["bench." + id + ".fault." + f.id] = bench::fault_enabled(settings, id, f.id) ? "on" : "off";
  }
  return meta;
}

struct SampleArgs {
  std::string harness;
  std::uint64_t budget = 10000;
  std::optional<double> seconds;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::vector<std::string> sets;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const auto harness = load_harness(a.harness, parse_sets(a.sets));
  SamplingOptions options;
  options.seed = a.seed;
  try {
    options.budget = a.seconds ? Budget::seconds(*a.seconds) : Budget::actions(a.budget);
  } catch (const std::invalid_argument& e) {
    throw Failure{kExitConfig, e.what()};
  }
  const LocMap map = sample_loc_traced(*harness, options).map;
  if (a.out) {
    auto file = open_output(*a.out);
    save_locmap(map, file);
    finish_output(file, *a.out);
  }
  out << "harness " << a.harness << ", " << options.budget.describe() << ", seed " << a.seed << '\n';
  out << std::left << std::setw(16) << "class" << std::right << std::setw(12) << "mean_loc"
      << std::setw(10) << "samples" << '\n';
  for (const auto& id : map.class_ids()) {
    auto it = map.entries.find(id);
    const std::uint64_t samples = it == map.entries.end() ? 0 : it->second.samples;
    out << std::left << std::setw(16) << id << std::right << std::setw(12) << std::fixed
        << std::setprecision(3) << map.mean(id) << std::setw(10) << samples << '\n';
  }
  out << std::defaultfloat;
  return kExitOk;
}

struct RunArgs {
  std::string harness;
  std::string strategy = "random";
  std::optional<std::string> locmap;
  std::optional<std::uint64_t> budget_actions;
  std::optional<double> budget_seconds;
  std::string coverage = "on";
  std::uint64_t seed = 0;
  std::size_t max_test_length = 100;
  std::string failures_dir = "failures";
  std::vector<std::string> sets;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto settings = parse_sets(a.sets);
  const auto harness = load_harness(a.harness, settings);
  const StrategyConfig strategy = make_strategy_config(a.strategy, a.locmap, *harness, err);
  Budget budget;
  try {
    budget = a.budget_seconds ? Budget::seconds(*a.budget_seconds) : Budget::actions(a.budget_actions.value_or(10000));
  } catch (const std::invalid_argument& e) {
    throw Failure{kExitConfig, e.what()};
  }
  if (a.max_test_length == 0) throw Failure{kExitConfig, "--max-test-length must be positive"};
  TrialOptions options;
  options.max_test_length = a.max_test_length;
  const TrialResult result = run_trial(*harness, strategy, budget, a.coverage == "on", a.seed, options);

  write_trial_csv_header(out);
  write_trial_csv_row(out, 0, result);
  if (!result.failing_tests.empty()) {
    std::error_code ec;
    fs::create_directories(a.failures_dir, ec);
    if (ec) throw Failure{kExitUnwritable, "cannot create '" + a.failures_dir + "'"};
    for (const auto& [signature, test] : result.failing_tests) {
      auto meta = harness_meta(a.harness, settings);
      meta["signature"] = signature.str();
      meta["strategy"] = result.strategy;
      const fs::path path = fs::path(a.failures_dir) / failure_file_name(signature);
      auto file = open_output(path);
      file << format_test(*harness, test, meta);
      finish_output(file, path);
      out << signature.str() << ' ' << path.generic_string() << '\n';
    }
  }
  return result.detected_fault() ? kExitFaults : kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::size_t> jobs;
  std::optional<std::string> csv;
  std::optional<std::string> markdown;
  std::optional<std::string> trials_csv;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw Failure{kExitConfig, "cannot read '" + a.config + "'"};
  ExperimentFile file;
  try {
    file = parse_experiment_file(in);
  } catch (const ConfigError& e) {
    throw Failure{kExitConfig, a.config + ": " + e.what()};
  }
  const fs::path base = fs::path(a.config).parent_path();
  const auto harness = load_harness(file.harness, file.settings);
  ExperimentConfig config;
  std::vector<std::string> warnings;
  try {
    config = build_experiment(file, *harness, base, &warnings);
    if (a.jobs) config.jobs = *a.jobs;
    config.validate();
  } catch (const ConfigError& e) {
    throw Failure{kExitConfig, a.config + ": " + e.what()};
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  // Paths from the file, and the default report names, are relative to the
  // file; flags are relative to the working directory.
  const std::string stem = fs::path(a.config).stem().string();
  auto resolve = [&](const std::optional<std::string>& flag, const std::optional<std::string>& key,
                     const std::string& fallback) -> std::optional<fs::path> {
    if (flag) return fs::path(*flag);
    if (key) return base / *key;
    if (fallback.empty()) return std::nullopt;
    return base / fallback;
  };
  const auto csv_path = resolve(a.csv, file.out_csv, stem + "_report.csv");
  const auto md_path = resolve(a.markdown, file.out_markdown, stem + "_report.md");
  const auto trials_path = resolve(a.trials_csv, file.out_trials, stem + "_trials.csv");
  auto csv = open_output(*csv_path);
  auto md = open_output(*md_path);
  auto trials = open_output(*trials_path);

  const ExperimentReport report = run_experiment(*harness, config);
  write_report_csv(csv, report);
  write_report_markdown(md, report);
  write_trials_csv(trials, report);
  finish_output(csv, *csv_path);
  finish_output(md, *md_path);
  finish_output(trials, *trials_path);
  write_report_markdown(out, report);
  return kExitOk;
}

struct ReplayArgs {
  std::string file;
  std::vector<std::string> sets;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.file, std::ios::binary);
  if (!in) throw Failure{kExitConfig, "cannot read '" + a.file + "'"};
  std::stringstream text;
  text << in.rdbuf();
  TestFile file;
  try {
    file = parse_test_file(text.str());
  } catch (const TestFormatError& e) {
    throw Failure{kExitConfig, a.file + ": " + e.what()};
  }
  auto it = file.meta.find("harness");
  if (it == file.meta.end()) throw Failure{kExitConfig, a.file + ": no '# harness=' line"};
  bench::Settings settings;
  for (const auto& [k, v] : file.meta) {
    if (k.starts_with("bench.")) settings[k] = v;
  }
  for (const auto& [k, v] : parse_sets(a.sets)) settings[k] = v;
  const auto harness = load_harness(it->second, settings);

  TestCase test;
  try {
    test = bind_test(file, *harness);
  } catch (const UnknownActionClass& e) {
    throw Failure{kExitConfig, a.file + ": " + e.what()};
  } catch (const TestFormatError& e) {
    throw Failure{kExitConfig, a.file + ": " + e.what()};
  }
  ReplayResult result;
  try {
    result = replay(*harness, test);
  } catch (const StepNotEnabled& e) {
    throw Failure{kExitConfig, a.file + ": " + e.what()};
  }

  const std::string got = result.signature ? result.signature->str() : "ok";
  out << got << '\n';
  auto recorded = file.meta.find("signature");
  if (recorded != file.meta.end() && recorded->second != got) {
    err << "recorded signature " << recorded->second << ", replay gave " << got << '\n';
    return kExitMismatch;
  }
  return result.signature ? kExitFaults : kExitOk;
}

struct OverheadArgs {
  std::string harness;
  double seconds = 1.0;
  std::size_t reps = 10;
  std::string strategy = "random";
  std::optional<std::string> locmap;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
};

int cmd_overhead(const OverheadArgs& a, std::ostream& out, std::ostream& err) {
  const auto harness = load_harness(a.harness, parse_sets(a.sets));
  const StrategyConfig strategy = make_strategy_config(a.strategy, a.locmap, *harness, err);
  if (!(a.seconds > 0)) throw Failure{kExitConfig, "--seconds must be positive"};
  if (a.reps == 0) throw Failure{kExitConfig, "--reps must be positive"};
  const auto report = measure_overhead(*harness, strategy, a.seconds, a.reps, a.seed);
  write_overhead_report(out, a.harness, strategy.name(), report);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LOC-biased random testing of stateful APIs", "locbias"};
  app.require_subcommand(1);

  auto add_sets = [](CLI::App* cmd, std::vector<std::string>& sets) {
    cmd->add_option("--set", sets, "Harness setting key=value, e.g. bench.avl.fault.rotation=off");
  };

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Estimate per-class LOC by sampling");
  c_sample->add_option("harness", sample.harness, "Harness id")->required();
  auto* s_actions =
      c_sample->add_option("--budget-actions", sample.budget, "Actions to sample")->capture_default_str();
  auto* s_seconds = c_sample->add_option("--budget-seconds", sample.seconds, "Sample for this many seconds instead");
  s_actions->excludes(s_seconds);
  c_sample->add_option("--seed", sample.seed, "Random seed")->capture_default_str();
  c_sample->add_option("--out", sample.out, "Write the LOC map to this file");
  add_sets(c_sample, sample.sets);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run one budgeted trial");
  c_run->add_option("harness", run.harness, "Harness id")->required();
  c_run->add_option("--strategy", run.strategy, "random, loc, swarm, ga, swarm-loc or ga-loc")
      ->capture_default_str();
  c_run->add_option("--locmap", run.locmap, "LOC map file (LOC strategies)");
  auto* actions = c_run->add_option("--budget-actions", run.budget_actions, "Action budget (default 10000)");
  auto* seconds = c_run->add_option("--budget-seconds", run.budget_seconds, "Wall-clock budget");
  actions->excludes(seconds);
  c_run->add_option("--coverage", run.coverage, "on or off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  c_run->add_option("--seed", run.seed, "Random seed")->capture_default_str();
  c_run->add_option("--max-test-length", run.max_test_length, "Steps per test")->capture_default_str();
  c_run->add_option("--failures-dir", run.failures_dir, "Directory for failing tests")
      ->capture_default_str();
  add_sets(c_run, run.sets);

  ExperimentArgs experiment;
  auto* c_exp = app.add_subcommand("experiment", "Run a multi-trial experiment from a config file");
  c_exp->add_option("config", experiment.config, "Experiment file")->required();
  c_exp->add_option("--jobs", experiment.jobs, "Trials to run in parallel");
  c_exp->add_option("--csv", experiment.csv, "Summary CSV path");
  c_exp->add_option("--markdown", experiment.markdown, "Markdown report path");
  c_exp->add_option("--trials-csv", experiment.trials_csv, "Per-trial CSV path");

  ReplayArgs replay_args;
  auto* c_replay = app.add_subcommand("replay", "Replay a saved test");
  c_replay->add_option("file", replay_args.file, "Test file")->required();
  add_sets(c_replay, replay_args.sets);

  OverheadArgs overhead;
  auto* c_over = app.add_subcommand("overhead", "Compare throughput with and without coverage probes");
  c_over->add_option("harness", overhead.harness, "Harness id")->required();
  c_over->add_option("--seconds", overhead.seconds, "Seconds per run")->capture_default_str();
  c_over->add_option("--reps", overhead.reps, "Paired repetitions")->capture_default_str();
  c_over->add_option("--strategy", overhead.strategy, "Strategy")->capture_default_str();
  c_over->add_option("--locmap", overhead.locmap, "LOC map file (LOC strategies)");
  c_over->add_option("--seed", overhead.seed, "Base seed")->capture_default_str();
  add_sets(c_over, overhead.sets);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_sample->parsed()) return cmd_sample(sample, out);
    if (c_run->parsed()) return cmd_run(run, out, err);
    if (c_exp->parsed()) return cmd_experiment(experiment, out, err);
    if (c_replay->parsed()) return cmd_replay(replay_args, out, err);
    if (c_over->parsed()) return cmd_overhead(overhead, out, err);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  }
  return kExitConfig;
}

}  // namespace locbias
