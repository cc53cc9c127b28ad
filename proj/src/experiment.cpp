#include "locbias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "locbias/loc_map.hpp"
#include "locbias/stats.hpp"

namespace locbias {

namespace {

std::vector<double> collect(const std::vector<TrialResult>& results, std::size_t begin,
                            std::size_t count, double (*metric)(const TrialResult&)) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = begin; i < begin + count; ++i) out.push_back(metric(results[i]));
  return out;
}

double branches_of(const TrialResult& r) { return static_cast<double>(r.coverage.branches()); }
double statements_of(const TrialResult& r) { return static_cast<double>(r.coverage.statements()); }
double faults_of(const TrialResult& r) { return static_cast<double>(r.signatures.size()); }

MetricSummary summarize(const std::vector<double>& xs) {
  return {stats::mean(xs), stats::median(xs)};
}

Comparison compare(const std::vector<double>& xs, const std::vector<double>& baseline) {
  Comparison c;
  const auto mw = stats::mann_whitney(xs, baseline);
  c.u = mw.u;
  c.p = mw.p;
  const double m = stats::mean(xs);
  const double mb = stats::mean(baseline);
  c.direction = (m > mb) - (m < mb);
  if (mb != 0) c.gain_percent = (m - mb) / mb * 100.0;
  return c;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is
// rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string format_p(double p) {
  std::ostringstream out;
  out << std::setprecision(4) << p;
  return out.str();
}

std::string gain_text(const std::optional<Comparison>& c) {
  if (!c) return "-";
  if (!c->gain_percent) return "N/A";
  std::string text = (*c->gain_percent >= 0 ? "+" : "") + fixed(*c->gain_percent) + "%";
  return c->significant() ? text : "*" + text + "*";
}

std::string equal_text(const std::optional<EqualBudget>& e) {
  if (!e) return "-";
  std::string text = e->mean_actions ? fixed(*e->mean_actions, 1) : std::string("DNF");
  if (e->dnf > 0) text += " (" + std::to_string(e->dnf) + "/" + std::to_string(e->runs) + " DNF)";
  return text;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
  if (trials < 2) throw ConfigError("experiment needs at least 2 trials per strategy");
  if (max_test_length == 0) throw ConfigError("max_test_length must be positive");
  if (jobs == 0) throw ConfigError("jobs must be positive");
  std::set<std::string> names;
  bool has_baseline = false;
  for (const auto& s : strategies) {
    try {
      s.validate();
    } catch (const StrategyError& e) {
      throw ConfigError(e.what());
    }
    if (!names.insert(s.name()).second) throw ConfigError("duplicate strategy '" + s.name() + "'");
    has_baseline = has_baseline || s.name() == baseline;
  }
  if (!has_baseline) throw ConfigError("baseline strategy '" + baseline + "' is not in the experiment");
}

EqualBudget equal_coverage_budget(const Harness& harness, const StrategyConfig& baseline,
                                  double target_branches, std::size_t runs,
                                  std::uint64_t cap_actions, std::uint64_t base_seed,
                                  std::size_t max_test_length) {
  EqualBudget out;
  out.target_branches = target_branches;
  out.runs = runs;
  if (runs == 0) return out;
  if (target_branches <= 0) {
    out.mean_actions = 0.0;
    return out;
  }
  const auto required = static_cast<std::size_t>(std::ceil(target_branches));
  if (required > harness.branch_probes()) {
    out.dnf = runs;
    return out;
  }
  TrialOptions options;
  options.max_test_length = max_test_length;
  options.stop_when = [required](const ProbeRegistry& registry, std::uint64_t) {
    return registry.branch_count() >= required;
  };
  double total = 0;
  std::size_t reached = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto r = run_trial(harness, baseline, Budget::actions(cap_actions), true, base_seed + i, options);
    if (r.stopped_early) {
      total += static_cast<double>(r.actions);
      ++reached;
    } else {
      ++out.dnf;
    }
  }
  if (reached > 0) out.mean_actions = total / static_cast<double>(reached);
  return out;
}

ExperimentReport run_experiment(const Harness& harness, const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_strategies = config.strategies.size();
  const std::size_t n = n_strategies * config.trials;

  ExperimentReport report;
  report.harness_id = config.harness_id.empty() ? harness.id() : config.harness_id;
  report.baseline = config.baseline;
  report.trials = config.trials;
  report.budget = config.budget.describe();
  report.coverage = config.coverage;
  report.results.resize(n);

  TrialOptions options;
  options.max_test_length = config.max_test_length;
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const auto& strategy = config.strategies[i / config.trials];
    const std::uint64_t seed = config.base_seed + i % config.trials;
    report.results[i] = run_trial(harness, strategy, config.budget, config.coverage, seed, options);
  });

  if (config.coverage) {
    double best_b = 0;
    double best_s = 0;
    for (const auto& r : report.results) {
      best_b = std::max(best_b, branches_of(r));
      best_s = std::max(best_s, statements_of(r));
    }
    for (const auto& r : report.results) {
      report.branches_normalized.push_back(best_b > 0 ? 100.0 * branches_of(r) / best_b : 0.0);
      report.statements_normalized.push_back(best_s > 0 ? 100.0 * statements_of(r) / best_s : 0.0);
    }
  }

  std::size_t baseline_index = 0;
  for (std::size_t s = 0; s < n_strategies; ++s) {
    if (config.strategies[s].name() == config.baseline) baseline_index = s;
  }
  const std::size_t t = config.trials;
  const auto base_b = collect(report.results, baseline_index * t, t, branches_of);
  const auto base_s = collect(report.results, baseline_index * t, t, statements_of);
  const auto base_f = collect(report.results, baseline_index * t, t, faults_of);

  for (std::size_t s = 0; s < n_strategies; ++s) {
    StrategySummary sum;
    sum.strategy = config.strategies[s].name();
    const auto b = collect(report.results, s * t, t, branches_of);
    const auto st = collect(report.results, s * t, t, statements_of);
    const auto f = collect(report.results, s * t, t, faults_of);
    std::size_t detected = 0;
    for (std::size_t i = s * t; i < (s + 1) * t; ++i) {
      detected += report.results[i].detected_fault() ? 1 : 0;
      sum.actions += report.results[i].actions;
    }
    sum.detection_rate = static_cast<double>(detected) / static_cast<double>(t);
    sum.faults = summarize(f);
    if (config.coverage) {
      sum.branches = summarize(b);
      sum.statements = summarize(st);
    }
    if (s != baseline_index) {
      sum.faults_vs_baseline = compare(f, base_f);
      if (config.coverage) {
        sum.branches_vs_baseline = compare(b, base_b);
        sum.statements_vs_baseline = compare(st, base_s);
        if (config.equal_budget_runs > 0 && config.budget.is_actions()) {
          sum.equal_branch = equal_coverage_budget(
              harness, config.strategies[baseline_index], sum.branches->mean,
              config.equal_budget_runs,
              config.equal_budget_cap_factor * config.budget.action_limit(), config.base_seed,
              config.max_test_length);
        }
      }
    }
    report.summaries.push_back(std::move(sum));
  }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "strategy,metric,mean,median,gain_percent,u,p,significant\n";
  auto row = [&](const StrategySummary& s, const char* metric, const MetricSummary& m,
                 const std::optional<Comparison>& c) {
    out << s.strategy << ',' << metric << ',' << fixed(m.mean, 4) << ',' << fixed(m.median, 4) << ',';
    if (c) {
      out << (c->gain_percent ? fixed(*c->gain_percent, 4) : "NA") << ',' << fixed(c->u, 1) << ','
          << format_p(c->p) << ',' << (c->significant() ? "yes" : "no");
    } else {
      out << ",,,";
    }
    out << '\n';
  };
  for (const auto& s : report.summaries) {
    if (s.branches) row(s, "branches", *s.branches, s.branches_vs_baseline);
    if (s.statements) row(s, "statements", *s.statements, s.statements_vs_baseline);
    row(s, "faults", s.faults, s.faults_vs_baseline);
    out << s.strategy << ",detection_rate," << fixed(s.detection_rate, 4) << ",,,,,\n";
    if (s.equal_branch) {
      out << s.strategy << ",equal_branch_actions,"
          << (s.equal_branch->mean_actions ? fixed(*s.equal_branch->mean_actions, 1) : "NA")
          << ",,,,," << '\n';
    }
  }
}

void write_report_markdown(std::ostream& out, const ExperimentReport& report) {
  out << "## " << report.harness_id << "\n\n";
  out << report.trials << " trials per strategy, budget " << report.budget << ", baseline "
      << report.baseline << ". Gains are relative to the baseline mean; *italic* gains are not "
      << "significant (Mann-Whitney p >= " << kSignificance << ").\n\n";

  out << "| strategy | branch % | stmt % | faults % | =branch |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& s : report.summaries) {
    out << "| " << s.strategy << " | " << gain_text(s.branches_vs_baseline) << " | "
        << gain_text(s.statements_vs_baseline) << " | " << gain_text(s.faults_vs_baseline) << " | "
        << equal_text(s.equal_branch) << " |\n";
  }

  out << "\n| strategy | branches mean | branches median | statements mean | statements median | "
         "faults mean | detection rate | p branches | p statements | p faults |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  auto metric = [](const std::optional<MetricSummary>& m, bool median) {
    return m ? fixed(median ? m->median : m->mean) : std::string("-");
  };
  auto p = [](const std::optional<Comparison>& c) { return c ? format_p(c->p) : std::string("-"); };
  for (const auto& s : report.summaries) {
    out << "| " << s.strategy << " | " << metric(s.branches, false) << " | " << metric(s.branches, true)
        << " | " << metric(s.statements, false) << " | " << metric(s.statements, true) << " | "
        << fixed(s.faults.mean) << " | " << fixed(s.detection_rate) << " | "
        << p(s.branches_vs_baseline) << " | " << p(s.statements_vs_baseline) << " | "
        << p(s.faults_vs_baseline) << " |\n";
  }
}

void write_trials_csv(std::ostream& out, const ExperimentReport& report) {
  out << "strategy,trial,seed,actions,tests,branches,statements,faults,branches_pct,statements_pct\n";
  const std::size_t t = report.trials;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    out << r.strategy << ',' << (t ? i % t : i) << ',' << r.seed << ',' << r.actions << ','
        << r.tests_completed << ',';
    if (report.coverage) {
      out << r.coverage.branches() << ',' << r.coverage.statements() << ',';
    } else {
      out << "-,-,";
    }
    out << r.signatures.size() << ',';
    if (report.coverage) {
      out << fixed(report.branches_normalized[i]) << ',' << fixed(report.statements_normalized[i]);
    } else {
      out << "-,-";
    }
    out << '\n';
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

// Drops a trailing comment, ignoring '#' inside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> parse_list(const std::string& value) {
  std::string body = value;
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<std::string> items;
  std::stringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  std::istringstream in(value);
  in >> out;
  if (!in || !in.eof() || value.empty() || (std::is_unsigned_v<T> && value.front() == '-')) {
    throw ConfigError("invalid value '" + value + "' for '" + key + "'");
  }
  return out;
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true") return true;
  if (value == "off" || value == "false") return false;
  throw ConfigError("'" + key + "' must be on or off, got '" + value + "'");
}

}  // namespace

ExperimentFile parse_experiment_file(std::istream& in) {
  ExperimentFile f;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");

    if (key == "harness") {
      f.harness = value;
    } else if (key == "strategies") {
      f.strategies = parse_list(value);
    } else if (key == "trials") {
      f.trials = parse_number<std::size_t>(key, value);
    } else if (key == "budget_actions") {
      f.budget_actions = parse_number<std::uint64_t>(key, value);
    } else if (key == "budget_seconds") {
      f.budget_seconds = parse_number<double>(key, value);
    } else if (key == "base_seed") {
      f.base_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "baseline") {
      f.baseline = value;
    } else if (key == "coverage") {
      f.coverage = parse_switch(key, value);
    } else if (key == "max_test_length") {
      f.max_test_length = parse_number<std::size_t>(key, value);
    } else if (key == "jobs") {
      f.jobs = parse_number<std::size_t>(key, value);
    } else if (key == "locmap") {
      f.locmap = value;
    } else if (key == "sample_budget") {
      f.sample_budget = parse_number<std::uint64_t>(key, value);
    } else if (key == "sample_seed") {
      f.sample_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "equal_budget_runs") {
      f.equal_budget_runs = parse_number<std::size_t>(key, value);
    } else if (key == "equal_budget_cap_factor") {
      f.equal_budget_cap_factor = parse_number<std::uint64_t>(key, value);
    } else if (key == "swarm_disable_prob") {
      f.swarm_disable_prob = parse_number<double>(key, value);
    } else if (key == "ga.population_cap") {
      f.ga.population_cap = parse_number<std::size_t>(key, value);
    } else if (key == "ga.elite_k") {
      f.ga.elite_k = parse_number<std::size_t>(key, value);
    } else if (key == "ga.fresh_prob") {
      f.ga.fresh_prob = parse_number<double>(key, value);
    } else if (key == "ga.mutate_weight") {
      f.ga.mutate_weight = parse_number<double>(key, value);
    } else if (key == "ga.crossover_weight") {
      f.ga.crossover_weight = parse_number<double>(key, value);
    } else if (key == "ga.extend_weight") {
      f.ga.extend_weight = parse_number<double>(key, value);
    } else if (key == "out_csv") {
      f.out_csv = value;
    } else if (key == "out_markdown") {
      f.out_markdown = value;
    } else if (key == "out_trials") {
      f.out_trials = value;
    } else if (key.starts_with("bench.")) {
      f.settings[key] = value;
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (f.harness.empty()) throw ConfigError("missing 'harness'");
  if (f.strategies.empty()) throw ConfigError("missing 'strategies'");
  if (f.budget_actions && f.budget_seconds) {
    throw ConfigError("set only one of budget_actions and budget_seconds");
  }
  return f;
}

ExperimentConfig build_experiment(const ExperimentFile& file, const Harness& harness,
                                  const std::filesystem::path& base_dir,
                                  std::vector<std::string>* warnings) {
  ExperimentConfig config;
  config.harness_id = harness.id();
  config.trials = file.trials;
  try {
    if (file.budget_seconds) {
      config.budget = Budget::seconds(*file.budget_seconds);
    } else if (file.budget_actions) {
      config.budget = Budget::actions(*file.budget_actions);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  config.base_seed = file.base_seed;
  config.baseline = file.baseline;
  config.coverage = file.coverage;
  config.max_test_length = file.max_test_length;
  config.jobs = file.jobs;
  config.equal_budget_runs = file.equal_budget_runs;
  config.equal_budget_cap_factor = file.equal_budget_cap_factor;

  std::optional<ProbabilityTable> table;
  auto loc_table = [&]() -> const ProbabilityTable& {
    if (table) return *table;
    LocMap map;
    if (file.locmap) {
      const std::filesystem::path path = base_dir / *file.locmap;
      try {
        auto loaded = load_locmap(path.string(), harness);
        if (warnings) warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
        map = std::move(loaded.map);
      } catch (const LocMapError& e) {
        throw ConfigError(e.what());
      }
    } else {
      if (file.sample_budget == 0) throw ConfigError("sample_budget must be positive");
      map = sample_loc(harness, file.sample_budget, file.sample_seed);
    }
    table = loc_distribution(map);
    return *table;
  };

  for (const auto& name : file.strategies) {
    const auto kind = parse_strategy_kind(name);
    if (!kind) throw ConfigError("unknown strategy '" + name + "'");
    StrategyConfig s;
    s.kind = *kind;
    if (uses_loc(*kind)) s.table = loc_table();
    s.swarm_disable_prob = file.swarm_disable_prob;
    s.ga = file.ga;
    config.strategies.push_back(std::move(s));
  }
  config.validate();
  return config;
}

}  // namespace locbias
