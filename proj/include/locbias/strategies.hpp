#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locbias/harness.hpp"
#include "locbias/loc_map.hpp"
#include "locbias/rng.hpp"

namespace locbias {

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StrategyKind { random, loc, swarm, ga, swarm_loc, ga_loc };

std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy_kind(std::string_view text);
bool uses_loc(StrategyKind kind);

struct GaParams {
  std::size_t population_cap = 50;
  double fresh_prob = 0.2;
  std::size_t elite_k = 10;
  double mutate_weight = 1.0;
  double crossover_weight = 1.0;
  double extend_weight = 1.0;
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::random;
  std::string label;  // report name; defaults to the kind name
  std::optional<ProbabilityTable> table;
  double swarm_disable_prob = 0.5;
  bool swarm_force_parents = true;
  GaParams ga;

  std::string name() const { return label.empty() ? std::string(to_string(kind)) : label; }
  // Throws StrategyError.
  void validate() const;
};

// Turns a base strategy into its LOC-biased counterpart: every uniform class
// choice it makes becomes a draw from `table`.
StrategyConfig compose_loc(StrategyKind base, ProbabilityTable table);

// Restricts the table to `enabled`, renormalizes, and inverts the cumulative
// distribution at u in ascending class-id order.
std::string pick_class_at(const ProbabilityTable& table, std::span<const std::string> enabled,
                          double u);
std::string pick_class(const ProbabilityTable& table, std::span<const std::string> enabled,
                       Rng& rng);

// Index-based version of pick_class bound to one harness.
class ClassPicker {
 public:
  ClassPicker(const Harness& harness, const ProbabilityTable& table);

  ClassIndex pick(std::span<const EnabledClass> enabled, Rng& rng) const;
  ClassIndex pick_at(std::span<const EnabledClass> enabled, double u) const;

 private:
  std::vector<double> weights_;      // by class index
  std::vector<std::uint32_t> rank_;  // position of the class in id order
  static constexpr ClassIndex kNone = ~ClassIndex{0};
  mutable std::vector<double> scratch_;
  mutable std::vector<ClassIndex> by_rank_;
};

// parents[b] lists the classes b depends on: b consumes a pool that only that
// class produces.
struct DependencyGraph {
  std::vector<std::vector<ClassIndex>> parents;
};

DependencyGraph dependency_graph(const Harness& harness);

struct SwarmConfig {
  ClassMask enabled;
  ClassMask drawn;        // before dependency closure, last attempt
  std::size_t attempts = 0;
  // Enabled classes summed over every attempt's raw draw, including redrawn
  // ones; the unconditioned enabled fraction is this / (attempts * classes).
  std::size_t drawn_enabled = 0;
};

// Disables each class independently with probability disable_prob, then
// force-enables transitive parents. Redraws while no sut-call class could
// ever become enabled; throws StrategyError when retries run out.
SwarmConfig swarm_config(const Harness& harness, const DependencyGraph& graph, Rng& rng,
                         double disable_prob = 0.5, bool force_parents = true,
                         std::size_t max_attempts = 1000);

// True if some sut-call class can eventually fire using only enabled classes.
bool swarm_viable(const Harness& harness, const ClassMask& enabled);

struct GaMember {
  TestCase test;
  std::size_t fitness = 0;  // distinct coverage probes hit by the test
  std::uint64_t age = 0;    // insertion stamp; smaller is older
};

struct GaPopulation {
  std::vector<GaMember> members;
  std::uint64_t inserted = 0;
};

enum class GaOp { fresh, mutate, crossover, extend };

std::string_view to_string(GaOp op);

// A test to execute: replay `prefix` while it stays enabled, then generate
// fresh steps until `target_length` steps ran. A prefix step that is not
// enabled at its position is discarded with the rest of the prefix.
struct GaPlan {
  GaOp op = GaOp::fresh;
  std::vector<TestStep> prefix;
  std::size_t target_length = 0;
};

GaPlan ga_propose(const GaPopulation& population, const GaParams& params,
                  std::size_t max_length, Rng& rng);

void ga_update(GaPopulation& population, TestCase executed, std::size_t fitness,
               const GaParams& params);

// Prefix before cut_a of a, followed by the suffix of b from cut_b.
std::vector<TestStep> crossover(std::span<const TestStep> a, std::size_t cut_a,
                                std::span<const TestStep> b, std::size_t cut_b);

// Step-by-step selection interface the runner drives.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual void begin_test(const HarnessState& state, Rng& rng) = 0;
  // nullopt ends the current test early.
  virtual std::optional<TestStep> next_step(const HarnessState& state, Rng& rng) = 0;
  virtual void end_test(const TestCase& executed, std::size_t fitness) {
    (void)executed;
    (void)fitness;
  }
  // True if the strategy reads per-test coverage fitness.
  virtual bool wants_fitness() const { return false; }
};

std::unique_ptr<Strategy> make_strategy(const StrategyConfig& config, const Harness& harness,
                                        std::size_t max_test_length);

}  // namespace locbias
