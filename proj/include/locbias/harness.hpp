#pragma once

#include <any>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "locbias/coverage.hpp"

namespace locbias {

// Malformed harness definition.
class HarnessError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A step was executed in a state where it is not enabled. Caller bug, or a
// corrupt recorded test.
class StepNotEnabled : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A step was executed after a failure without resetting first.
class PoisonedState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A test references an action class this harness does not define.
class UnknownActionClass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by SUT code to report an error condition. The category becomes part
// of the fault signature.
class SutError : public std::runtime_error {
 public:
  explicit SutError(std::string category)
      : std::runtime_error(category), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

using PoolIndex = std::uint32_t;
using ClassIndex = std::uint32_t;

// Dedup key for failures. Text form is "property:category".
struct FaultSignature {
  std::string property;
  std::string category;

  std::string str() const { return property + ":" + category; }
  static FaultSignature parse(std::string_view text);

  friend auto operator<=>(const FaultSignature&, const FaultSignature&) = default;
};

struct PoolSpec {
  std::string name;
  std::size_t capacity = 1;
};

enum class ActionKind {
  value_init,     // assigns a value from a finite domain; consumes nothing
  value_compose,  // builds a pool value from other pool values, no SUT code
  sut_call,       // calls into the system under test
};

std::string_view to_string(ActionKind kind);

// Read-only view of the pool values an action consumes, in declaration order.
class Args {
 public:
  explicit Args(std::span<const std::any* const> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  const std::any& raw(std::size_t i) const { return *values_[i]; }

  template <class T>
  const T& value(std::size_t i) const {
    return std::any_cast<const T&>(*values_[i]);
  }

  // Objects are stored as shared_ptr<T>; the pointee stays mutable.
  template <class T>
  T& object(std::size_t i) const {
    return *std::any_cast<const std::shared_ptr<T>&>(*values_[i]);
  }

 private:
  std::span<const std::any* const> values_;
};

// Everything an executor may touch while running one step.
class StepContext {
 public:
  StepContext(Args args, std::uint32_t choice, TraceContext& trace, std::any& sut_state)
      : args_(args), choice_(choice), trace_(trace), sut_state_(sut_state) {}

  const Args& args() const { return args_; }

  template <class T>
  const T& value(std::size_t i) const {
    return args_.value<T>(i);
  }

  template <class T>
  T& object(std::size_t i) const {
    return args_.object<T>(i);
  }

  // Index into the class's value domain.
  std::uint32_t choice() const { return choice_; }

  TraceContext& trace() { return trace_; }
  std::any& sut_state() { return sut_state_; }

  void produce(std::any value) { produced_ = std::move(value); }

  template <class T>
  void produce_object(std::shared_ptr<T> object) {
    produced_ = std::move(object);
  }

  // Marks the step as a property violation (e.g. a differential mismatch
  // detected while executing the action).
  void fail(std::string property, std::string category) {
    if (!failure_) failure_ = FaultSignature{std::move(property), std::move(category)};
  }

  std::optional<std::any>& produced() { return produced_; }
  const std::optional<FaultSignature>& failure() const { return failure_; }

 private:
  Args args_;
  std::uint32_t choice_;
  TraceContext& trace_;
  std::any& sut_state_;
  std::optional<std::any> produced_;
  std::optional<FaultSignature> failure_;
};

using Executor = std::function<void(StepContext&)>;
using Guard = std::function<bool(const Args&)>;

struct ActionClassSpec {
  std::string id;
  ActionKind kind = ActionKind::sut_call;
  std::vector<std::string> consumes;   // pool names
  std::optional<std::string> produces; // pool name
  std::uint32_t domain_size = 0;       // 0 = no value choice
  Executor executor;
  Guard guard;                         // optional extra enabledness predicate
  // Top-level SUT functions named by this class, for static LOC estimation.
  std::vector<std::string> bound_functions;
};

// Read access to all pool slots, for properties.
class PoolView {
 public:
  PoolView(std::span<const std::vector<std::optional<std::any>>> slots) : slots_(slots) {}

  std::size_t capacity(PoolIndex pool) const { return slots_[pool].size(); }
  const std::optional<std::any>& slot(PoolIndex pool, std::size_t i) const {
    return slots_[pool][i];
  }

  // Calls f(T&) for every initialized object slot of the pool.
  template <class T, class F>
  void for_each_object(PoolIndex pool, F&& f) const {
    for (const auto& s : slots_[pool]) {
      if (s) f(*std::any_cast<const std::shared_ptr<T>&>(*s));
    }
  }

  template <class T, class F>
  void for_each_value(PoolIndex pool, F&& f) const {
    for (const auto& s : slots_[pool]) {
      if (s) f(std::any_cast<const T&>(*s));
    }
  }

 private:
  std::span<const std::vector<std::optional<std::any>>> slots_;
};

// Returns a failure category, or nullopt when the property holds.
using PropertyCheck = std::function<std::optional<std::string>(const PoolView&, TraceContext&)>;

struct PropertySpec {
  std::string id;
  PropertyCheck check;
};

// An action class with its pool references resolved to indices.
struct ActionClass {
  ActionClassSpec spec;
  std::vector<PoolIndex> consumes;
  std::optional<PoolIndex> produces;

  const std::string& id() const { return spec.id; }
  ActionKind kind() const { return spec.kind; }
};

// The executable definition of pools, action classes, properties and
// instrumented functions for one SUT. Immutable once built; shared read-only
// between trials.
class Harness {
 public:
  explicit Harness(std::string id);

  PoolIndex add_pool(std::string name, std::size_t capacity);
  FunctionId add_function(std::string name, std::uint32_t loc, bool harness_owned = false);
  ClassIndex add_class(ActionClassSpec spec);
  void add_property(PropertySpec spec);
  void set_probe_capacity(std::size_t branches, std::size_t statements);
  void set_sut_factory(std::function<std::any()> factory) { sut_factory_ = std::move(factory); }

  const std::string& id() const { return id_; }
  std::span<const PoolSpec> pools() const { return pools_; }
  std::span<const ActionClass> classes() const { return classes_; }
  std::span<const PropertySpec> properties() const { return properties_; }
  std::span<const FunctionInfo> functions() const { return functions_; }
  std::size_t branch_probes() const { return branch_probes_; }
  std::size_t stmt_probes() const { return stmt_probes_; }

  std::size_t class_count() const { return classes_.size(); }
  const ActionClass& action_class(ClassIndex c) const { return classes_.at(c); }
  std::optional<ClassIndex> find_class(std::string_view id) const;
  // Throws UnknownActionClass.
  ClassIndex class_index(std::string_view id) const;
  std::vector<std::string> class_ids() const;

  std::optional<PoolIndex> find_pool(std::string_view name) const;
  std::optional<FunctionId> find_function(std::string_view name) const;

  std::any make_sut_state() const { return sut_factory_ ? sut_factory_() : std::any{}; }

 private:
  std::string id_;
  std::vector<PoolSpec> pools_;
  std::vector<ActionClass> classes_;
  std::vector<PropertySpec> properties_;
  std::vector<FunctionInfo> functions_;
  std::unordered_map<std::string, ClassIndex> class_by_id_;
  std::size_t branch_probes_ = 0;
  std::size_t stmt_probes_ = 0;
  std::function<std::any()> sut_factory_;
};

// One resolved action. `slots` lists a slot per consumed pool followed by the
// produced slot, if any. `value` indexes the class's value domain (0 when the
// class has none).
struct TestStep {
  ClassIndex class_index = 0;
  std::vector<std::uint32_t> slots;
  std::uint32_t value = 0;

  friend bool operator==(const TestStep&, const TestStep&) = default;
};

struct TestCase {
  std::uint64_t seed = 0;
  std::vector<TestStep> steps;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

enum class StepStatus { ok, property_violation, sut_error };

std::string_view to_string(StepStatus status);

struct EnteredFunction {
  FunctionId id;
  std::uint32_t loc;
};

struct StepOutcome {
  StepStatus status = StepStatus::ok;
  std::optional<FaultSignature> signature;
  std::vector<EnteredFunction> entered;

  // Sum of LOC over the distinct functions entered during the step.
  std::uint64_t loc_sum() const;
};

struct EnabledClass {
  ClassIndex class_index;
  std::uint64_t count;  // distinct concrete actions

  friend bool operator==(const EnabledClass&, const EnabledClass&) = default;
};

// Per-class on/off switch; empty means everything is enabled.
using ClassMask = std::vector<bool>;

// Mutable per-test state: pool slots, the opaque SUT handle and the trace
// context SUT code reports into. Single-threaded.
class HarnessState {
 public:
  explicit HarnessState(const Harness& harness, ProbeRegistry* registry = nullptr);
  HarnessState(const HarnessState&) = delete;
  HarnessState& operator=(const HarnessState&) = delete;

  const Harness& harness() const { return *harness_; }

  // Clears every slot and recreates the SUT handle. Coverage held by the
  // registry is untouched.
  void reset();

  std::vector<EnabledClass> enabled_actions(const ClassMask& mask = {}) const;

  // Number of concrete actions of class c enabled right now.
  std::uint64_t action_count(ClassIndex c) const;

  // The which-th concrete action of class c, which < action_count(c).
  TestStep resolve(ClassIndex c, std::uint64_t which) const;

  bool is_enabled(const TestStep& step) const;

  // Runs the executor, then every property. Throws StepNotEnabled or
  // PoisonedState.
  StepOutcome execute(const TestStep& step);

  bool poisoned() const { return poisoned_; }
  std::size_t step_count() const { return step_count_; }
  std::uint64_t property_evaluations() const { return property_evaluations_; }
  bool initialized(PoolIndex pool, std::size_t slot) const {
    return slots_[pool][slot].has_value();
  }

  TraceContext& trace() { return trace_; }
  PoolView pools() const { return PoolView(slots_); }

 private:
  // Enumerates consumed-slot tuples (lexicographic, guard-filtered) and calls
  // f(tuple) until it returns false.
  template <class F>
  void for_each_tuple(const ActionClass& cls, F&& f) const;
  std::uint64_t tuple_count(const ActionClass& cls) const;

  const Harness* harness_;
  std::vector<std::vector<std::optional<std::any>>> slots_;
  std::any sut_state_;
  TraceContext trace_;
  bool poisoned_ = false;
  std::size_t step_count_ = 0;
  std::uint64_t property_evaluations_ = 0;
};

struct ReplayResult {
  StepStatus status = StepStatus::ok;
  std::optional<FaultSignature> signature;
  std::size_t steps_executed = 0;
};

// Executes the test on a fresh state, stopping at the first failure.
ReplayResult replay(const Harness& harness, const TestCase& test,
                    ProbeRegistry* registry = nullptr);

}  // namespace locbias
