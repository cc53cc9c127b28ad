#include "locbias/bench/bench.hpp"

#include <algorithm>

namespace locbias::bench {

namespace {

using Factory = std::shared_ptr<const Harness> (*)(const Settings&);

struct Entry {
  const char* id;
  Factory factory;
};

constexpr Entry kHarnesses[] = {
    {"avl", &avl_harness},
    {"heap", &heap_harness},
    {"sortedlist", &sortedlist_harness},
    {"codec", &codec_harness},
    {"exprparser", &exprparser_harness},
};

const std::vector<FaultSeed>& all_faults() {
  static const std::vector<FaultSeed> faults = {
      {"avl", "rotation", "AvlTree::rebalance",
       "right-left imbalance after a delete, or after an insert once the tree holds at least 5 keys"},
      {"heap", "siftdown", "Heap::sift_down",
       "pop from a heap of at least 6 elements"},
      {"sortedlist", "slice", "SortedList::slice",
       "slice read from a list longer than 5 elements"},
      {"sortedlist", "union", "SortedList::merge_union",
       "union where both inputs hold more than 8 elements"},
  };
  return faults;
}

bool known_fault(std::string_view harness, std::string_view fault) {
  const auto& faults = all_faults();
  return std::any_of(faults.begin(), faults.end(), [&](const FaultSeed& f) {
    return f.harness == harness && f.id == fault;
  });
}

// Checks every bench.* key: bench.<harness>.fault.<fault> = on | off.
void validate(const Settings& settings) {
  constexpr std::string_view kPrefix = "bench.";
  for (const auto& [key, value] : settings) {
    if (!key.starts_with(kPrefix)) continue;
    const std::string_view rest = std::string_view(key).substr(kPrefix.size());
    const auto dot = rest.find('.');
    const std::string_view harness = rest.substr(0, dot);
    constexpr std::string_view kFault = ".fault.";
    if (dot == std::string_view::npos || rest.substr(dot, kFault.size()) != kFault ||
        !known_fault(harness, rest.substr(dot + kFault.size()))) {
      throw SettingsError("unknown setting '" + key + "'");
    }
    if (value != "on" && value != "off") {
      throw SettingsError("setting '" + key + "' must be on or off, got '" + value + "'");
    }
  }
}

}  // namespace

std::vector<std::string> bench_ids() {
  std::vector<std::string> ids;
  for (const auto& e : kHarnesses) ids.emplace_back(e.id);
  return ids;
}

std::vector<FaultSeed> bench_faults(std::string_view harness_id) {
  std::vector<FaultSeed> out;
  for (const auto& f : all_faults()) {
    if (f.harness == harness_id) out.push_back(f);
  }
  return out;
}

std::shared_ptr<const Harness> make_bench_harness(std::string_view id, const Settings& settings) {
  for (const auto& e : kHarnesses) {
    if (e.id == id) {
      validate(settings);
      return e.factory(settings);
    }
  }
  throw UnknownHarness("unknown harness '" + std::string(id) + "'");
}

bool fault_enabled(const Settings& settings, std::string_view harness_id, std::string_view fault_id) {
  const std::string key = "bench." + std::string(harness_id) + ".fault." + std::string(fault_id);
  auto it = settings.find(key);
  if (it == settings.end()) {
    for (const auto& f : all_faults()) {
      if (f.harness == harness_id && f.id == fault_id) return f.enabled_by_default;
    }
    return false;
  }
  return it->second == "on";
}

void register_functions(Harness& harness, std::span<const FunctionLoc> table) {
  for (const auto& f : table) harness.add_function(f.name, f.loc);
}

}  // namespace locbias::bench
