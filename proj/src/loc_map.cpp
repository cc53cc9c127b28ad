#include "locbias/loc_map.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "locbias/rng.hpp"

namespace locbias {

double LocMap::mean(std::string_view class_id) const {
  auto it = entries.find(std::string(class_id));
  return it == entries.end() ? 0.0 : it->second.mean_loc;
}

std::vector<std::string> LocMap::class_ids() const {
  std::set<std::string> ids(unsampled.begin(), unsampled.end());
  for (const auto& [id, entry] : entries) ids.insert(id);
  return {ids.begin(), ids.end()};
}

double ProbabilityTable::at(std::string_view class_id) const {
  auto it = std::lower_bound(probs.begin(), probs.end(), class_id,
                             [](const auto& p, std::string_view id) { return p.first < id; });
  if (it == probs.end() || it->first != class_id) {
    throw LocMapError("no probability for class '" + std::string(class_id) + "'");
  }
  return it->second;
}

bool ProbabilityTable::contains(std::string_view class_id) const {
  return std::binary_search(
      probs.begin(), probs.end(), std::pair<std::string, double>{std::string(class_id), 0.0},
      [](const auto& a, const auto& b) { return a.first < b.first; });
}

ProbabilityTable ProbabilityTable::uniform(std::vector<std::string> class_ids) {
  if (class_ids.empty()) throw LocMapError("empty harness");
  std::sort(class_ids.begin(), class_ids.end());
  class_ids.erase(std::unique(class_ids.begin(), class_ids.end()), class_ids.end());
  ProbabilityTable table;
  const double p = 1.0 / static_cast<double>(class_ids.size());
  for (auto& id : class_ids) table.probs.emplace_back(std::move(id), p);
  return table;
}

std::vector<double> ProbabilityTable::aligned(const Harness& harness) const {
  std::vector<double> out;
  out.reserve(harness.class_count());
  for (const auto& cls : harness.classes()) out.push_back(at(cls.id()));
  return out;
}

ProbabilityTable loc_distribution(const LocMap& map) {
  const auto ids = map.class_ids();
  if (ids.empty()) throw LocMapError("empty harness: no action classes in LOC map");

  ProbabilityTable table;
  std::vector<double> means;
  means.reserve(ids.size());
  for (const auto& id : ids) {
    const double m = map.mean(id);
    means.push_back(m);
    if (m > 0) {
      table.m1 += m;
    } else {
      ++table.m0;
    }
  }

  const double n = static_cast<double>(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double p;
    if (table.m1 == 0.0) {
      p = 1.0 / n;
    } else if (table.m0 == 0) {
      p = means[i] / table.m1;
    } else if (means[i] > 0) {
      p = 0.8 * means[i] / table.m1;
    } else {
      p = 0.2 / static_cast<double>(table.m0);
    }
    table.probs.emplace_back(ids[i], p);
  }
  return table;
}

SamplingResult sample_loc_traced(const Harness& harness, const SamplingOptions& options) {
  const std::size_t n = harness.class_count();
  SamplingResult result;
  result.map.harness_id = harness.id();

  std::vector<std::uint64_t> counts(n, 0);
  std::vector<double> sums(n, 0.0);

  Rng rng(options.seed);
  HarnessState state(harness);
  state.trace().set_tracing(true);

  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(options.budget.amount));
  auto exhausted = [&] {
    if (options.budget.is_actions()) return result.actions >= options.budget.action_limit();
    return Clock::now() >= deadline;
  };

  std::vector<EnabledClass> preferred;
  while (!exhausted()) {
    if (state.step_count() >= options.max_test_length) state.reset();
    const auto enabled = state.enabled_actions();
    if (enabled.empty()) {
      if (state.step_count() == 0) break;  // nothing can ever run
      state.reset();
      continue;
    }
    preferred.clear();
    for (const auto& e : enabled) {
      if (counts[e.class_index] == 0) preferred.push_back(e);
    }
    const auto& pool = preferred.empty() ? enabled : preferred;
    const EnabledClass& pick = pool[rng.below(pool.size())];
    const TestStep step = state.resolve(pick.class_index, rng.below(pick.count));

    const StepOutcome outcome = state.execute(step);
    sums[pick.class_index] += static_cast<double>(outcome.loc_sum());
    ++counts[pick.class_index];
    ++result.actions;
    result.trace.push_back({pick.class_index, !preferred.empty(), counts[pick.class_index] == 1});

    // Failing steps still count as samples; the state is discarded.
    if (outcome.status != StepStatus::ok) state.reset();
  }

  for (ClassIndex c = 0; c < n; ++c) {
    const auto& id = harness.action_class(c).id();
    if (counts[c] == 0) {
      result.map.unsampled.insert(id);
    } else {
      result.map.entries[id] = {sums[c] / static_cast<double>(counts[c]), counts[c]};
    }
  }
  return result;
}

LocMap sample_loc(const Harness& harness, std::uint64_t budget_actions, std::uint64_t seed) {
  SamplingOptions options;
  options.budget = Budget::actions(budget_actions);
  options.seed = seed;
  return sample_loc_traced(harness, options).map;
}

LocMap static_loc(const std::map<std::string, std::uint32_t>& function_table,
                  const std::map<std::string, std::set<std::string>>& bindings) {
  LocMap map;
  for (const auto& [class_id, functions] : bindings) {
    if (functions.empty()) {
      map.unsampled.insert(class_id);
      continue;
    }
    double total = 0;
    for (const auto& fn : functions) {
      auto it = function_table.find(fn);
      if (it == function_table.end()) throw LocMapError("unknown function id '" + fn + "'");
      total += it->second;
    }
    map.entries[class_id] = {total, 1};
  }
  return map;
}

LocMap static_loc(const Harness& harness) {
  std::map<std::string, std::uint32_t> table;
  for (const auto& fn : harness.functions()) table[fn.name] = fn.loc;
  std::map<std::string, std::set<std::string>> bindings;
  for (const auto& cls : harness.classes()) {
    bindings[cls.id()] = {cls.spec.bound_functions.begin(), cls.spec.bound_functions.end()};
  }
  LocMap map = static_loc(table, bindings);
  map.harness_id = harness.id();
  return map;
}

void save_locmap(const LocMap& map, std::ostream& out) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& id : map.class_ids()) {
    auto it = map.entries.find(id);
    const LocEntry entry = it == map.entries.end() ? LocEntry{} : it->second;
    classes.push_back({{"id", id}, {"mean_loc", entry.mean_loc}, {"samples", entry.samples}});
  }
  const nlohmann::json doc = {
      {"version", kLocMapVersion}, {"harness-id", map.harness_id}, {"classes", classes}};
  out << doc.dump(2) << '\n';
}

void save_locmap(const LocMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LocMapError("cannot write LOC map to '" + path + "'");
  save_locmap(map, out);
  if (!out) throw LocMapError("failed writing LOC map to '" + path + "'");
}

LoadedLocMap load_locmap(std::istream& in, const Harness& harness) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LocMapError(std::string("malformed LOC map: ") + e.what());
  }

  LoadedLocMap loaded;
  try {
    const int version = doc.at("version").get<int>();
    if (version != kLocMapVersion) {
      throw LocMapError("LOC map version mismatch: file has " + std::to_string(version) +
                        ", expected " + std::to_string(kLocMapVersion));
    }
    loaded.map.harness_id = doc.at("harness-id").get<std::string>();
    if (loaded.map.harness_id != harness.id()) {
      loaded.warnings.push_back("LOC map was sampled for harness '" + loaded.map.harness_id +
                                "', loading into '" + harness.id() + "'");
    }
    for (const auto& c : doc.at("classes")) {
      const auto id = c.at("id").get<std::string>();
      const double mean = c.at("mean_loc").get<double>();
      const auto samples = c.at("samples").get<std::uint64_t>();
      if (mean < 0 || (samples == 0 && mean != 0)) {
        throw LocMapError("malformed LOC map: bad entry for '" + id + "'");
      }
      if (!harness.find_class(id)) {
        loaded.warnings.push_back("dropping class '" + id + "' not present in harness '" +
                                  harness.id() + "'");
        continue;
      }
      if (samples == 0) {
        loaded.map.unsampled.insert(id);
      } else {
        loaded.map.entries[id] = {mean, samples};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw LocMapError(std::string("malformed LOC map: ") + e.what());
  }

  for (const auto& cls : harness.classes()) {
    if (!loaded.map.entries.contains(cls.id())) loaded.map.unsampled.insert(cls.id());
  }
  return loaded;
}

LoadedLocMap load_locmap(const std::string& path, const Harness& harness) {
  std::ifstream in(path);
  if (!in) throw LocMapError("cannot read LOC map '" + path + "'");
  return load_locmap(in, harness);
}

}  // namespace locbias
