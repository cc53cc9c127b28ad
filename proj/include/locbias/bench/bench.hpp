#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locbias/harness.hpp"

namespace locbias::bench {

class UnknownHarness : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SettingsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration keys such as "bench.avl.fault.rotation" -> "on" | "off".
using Settings = std::map<std::string, std::string>;

struct FaultSeed {
  std::string harness;
  std::string id;
  std::string function;  // name in the harness function table
  std::string trigger;
  bool enabled_by_default = true;
};

struct FunctionLoc {
  const char* name;
  std::uint32_t loc;
};

std::vector<std::string> bench_ids();
std::vector<FaultSeed> bench_faults(std::string_view harness_id);

// Throws UnknownHarness or SettingsError (unknown keys under bench.<id>., or
// values other than on/off).
std::shared_ptr<const Harness> make_bench_harness(std::string_view id, const Settings& settings = {});

// Whether fault `fault_id` is switched on for the harness.
bool fault_enabled(const Settings& settings, std::string_view harness_id, std::string_view fault_id);

std::shared_ptr<const Harness> avl_harness(const Settings& settings = {});
std::shared_ptr<const Harness> heap_harness(const Settings& settings = {});
std::shared_ptr<const Harness> sortedlist_harness(const Settings& settings = {});
std::shared_ptr<const Harness> codec_harness(const Settings& settings = {});
std::shared_ptr<const Harness> exprparser_harness(const Settings& settings = {});

// Registers a SUT function table in order, so FunctionId equals the index.
void register_functions(Harness& harness, std::span<const FunctionLoc> table);

}  // namespace locbias::bench
