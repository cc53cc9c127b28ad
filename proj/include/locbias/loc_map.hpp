#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "locbias/budget.hpp"
#include "locbias/harness.hpp"

namespace locbias {

class LocMapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocEntry {
  double mean_loc = 0.0;
  std::uint64_t samples = 0;

  friend bool operator==(const LocEntry&, const LocEntry&) = default;
};

// Per-action-class mean LOC estimate. Classes that were never measured live
// in `unsampled` and count as zero-LOC.
struct LocMap {
  std::string harness_id;
  std::map<std::string, LocEntry> entries;
  std::set<std::string> unsampled;

  double mean(std::string_view class_id) const;
  // Sorted union of sampled and unsampled class ids.
  std::vector<std::string> class_ids() const;

  friend bool operator==(const LocMap&, const LocMap&) = default;
};

// Normalized class-selection probabilities, ordered by class id.
struct ProbabilityTable {
  std::vector<std::pair<std::string, double>> probs;
  std::size_t m0 = 0;  // classes with zero LOC
  double m1 = 0.0;     // sum of positive mean LOC

  double at(std::string_view class_id) const;
  bool contains(std::string_view class_id) const;

  static ProbabilityTable uniform(std::vector<std::string> class_ids);

  // Probabilities indexed by harness class index. Throws LocMapError if a
  // harness class has no entry.
  std::vector<double> aligned(const Harness& harness) const;
};

// The linear LOC bias: zero-LOC classes share 0.2 evenly, the rest get
// 0.8 * m / M1. Falls back to pure proportionality when no class is zero and
// to uniform when none is positive. Throws LocMapError on an empty map.
ProbabilityTable loc_distribution(const LocMap& map);

struct SamplingOptions {
  Budget budget = Budget::actions(10000);
  std::uint64_t seed = 0;
  std::size_t max_test_length = 100;
};

struct SamplingChoice {
  ClassIndex chosen;
  bool unsampled_enabled;  // some enabled class had no sample yet
  bool chosen_unsampled;
};

struct SamplingResult {
  LocMap map;
  std::vector<SamplingChoice> trace;
  std::uint64_t actions = 0;
};

// Random testing with the function-entry hook installed. Enabled classes
// without a sample are always preferred. Each executed step contributes one
// sample: the summed LOC of the distinct functions it entered.
SamplingResult sample_loc_traced(const Harness& harness, const SamplingOptions& options);
LocMap sample_loc(const Harness& harness, std::uint64_t budget_actions, std::uint64_t seed);

// Static estimate: each class's LOC is the sum over the functions bound to it,
// without following calls. Throws LocMapError for unknown function ids.
LocMap static_loc(const std::map<std::string, std::uint32_t>& function_table,
                  const std::map<std::string, std::set<std::string>>& bindings);
LocMap static_loc(const Harness& harness);

// JSON persistence.
inline constexpr int kLocMapVersion = 1;

void save_locmap(const LocMap& map, std::ostream& out);
void save_locmap(const LocMap& map, const std::string& path);

struct LoadedLocMap {
  LocMap map;
  std::vector<std::string> warnings;
};

// Drops classes the harness no longer has (with a warning) and marks harness
// classes missing from the file as unsampled.
LoadedLocMap load_locmap(std::istream& in, const Harness& harness);
LoadedLocMap load_locmap(const std::string& path, const Harness& harness);

}  // namespace locbias
