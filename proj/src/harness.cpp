#include "locbias/harness.hpp"

#include <algorithm>

namespace locbias {

FaultSignature FaultSignature::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw std::invalid_argument("malformed fault signature: " + std::string(text));
  }
  return {std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::value_init: return "value-init";
    case ActionKind::value_compose: return "value-compose";
    case ActionKind::sut_call: return "sut-call";
  }
  return "?";
}

std::string_view to_string(StepStatus status) {
  switch (status) {
    case StepStatus::ok: return "ok";
    case StepStatus::property_violation: return "property-violation";
    case StepStatus::sut_error: return "sut-error";
  }
  return "?";
}

std::uint64_t StepOutcome::loc_sum() const {
  std::uint64_t total = 0;
  for (const auto& e : entered) total += e.loc;
  return total;
}

Harness::Harness(std::string id) : id_(std::move(id)) {
  if (id_.empty()) throw HarnessError("harness id must be non-empty");
}

PoolIndex Harness::add_pool(std::string name, std::size_t capacity) {
  if (capacity < 1) throw HarnessError("pool '" + name + "' needs capacity >= 1");
  if (find_pool(name)) throw HarnessError("duplicate pool '" + name + "'");
  pools_.push_back({std::move(name), capacity});
  return static_cast<PoolIndex>(pools_.size() - 1);
}

FunctionId Harness::add_function(std::string name, std::uint32_t loc, bool harness_owned) {
  if (find_function(name)) throw HarnessError("duplicate function '" + name + "'");
  // Harness code never contributes LOC.
  functions_.push_back({std::move(name), harness_owned ? 0 : loc, harness_owned});
  return static_cast<FunctionId>(functions_.size() - 1);
}

ClassIndex Harness::add_class(ActionClassSpec spec) {
  if (spec.id.empty() || spec.id.find_first_of(" \t\n:") != std::string::npos) {
    throw HarnessError("invalid action class id '" + spec.id + "'");
  }
  if (class_by_id_.contains(spec.id)) throw HarnessError("duplicate action class '" + spec.id + "'");
  if (!spec.executor) throw HarnessError("action class '" + spec.id + "' has no executor");
  if (spec.kind == ActionKind::value_init) {
    if (!spec.consumes.empty()) {
      throw HarnessError("value-init class '" + spec.id + "' must not consume pools");
    }
    if (spec.domain_size == 0) {
      throw HarnessError("value-init class '" + spec.id + "' needs a non-empty domain");
    }
  }
  ActionClass cls;
  for (const auto& name : spec.consumes) {
    auto p = find_pool(name);
    if (!p) throw HarnessError("class '" + spec.id + "' consumes undeclared pool '" + name + "'");
    cls.consumes.push_back(*p);
  }
  if (spec.produces) {
    auto p = find_pool(*spec.produces);
    if (!p) {
      throw HarnessError("class '" + spec.id + "' produces undeclared pool '" + *spec.produces + "'");
    }
    cls.produces = *p;
  }
  cls.spec = std::move(spec);
  const auto index = static_cast<ClassIndex>(classes_.size());
  class_by_id_.emplace(cls.spec.id, index);
  classes_.push_back(std::move(cls));
  return index;
}

void Harness::add_property(PropertySpec spec) {
  if (spec.id.empty() || spec.id.find(':') != std::string::npos) {
    throw HarnessError("invalid property id '" + spec.id + "'");
  }
  if (!spec.check) throw HarnessError("property '" + spec.id + "' has no check");
  properties_.push_back(std::move(spec));
}

void Harness::set_probe_capacity(std::size_t branches, std::size_t statements) {
  branch_probes_ = branches;
  stmt_probes_ = statements;
}

std::optional<ClassIndex> Harness::find_class(std::string_view id) const {
  auto it = class_by_id_.find(std::string(id));
  if (it == class_by_id_.end()) return std::nullopt;
  return it->second;
}

ClassIndex Harness::class_index(std::string_view id) const {
  auto c = find_class(id);
  if (!c) throw UnknownActionClass("unknown action class '" + std::string(id) + "'");
  return *c;
}

std::vector<std::string> Harness::class_ids() const {
  std::vector<std::string> ids;
  ids.reserve(classes_.size());
  for (const auto& c : classes_) ids.push_back(c.id());
  return ids;
}

std::optional<PoolIndex> Harness::find_pool(std::string_view name) const {
  for (std::size_t i = 0; i < pools_.size(); ++i) {
    if (pools_[i].name == name) return static_cast<PoolIndex>(i);
  }
  return std::nullopt;
}

std::optional<FunctionId> Harness::find_function(std::string_view name) const {
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (functions_[i].name == name) return static_cast<FunctionId>(i);
  }
  return std::nullopt;
}

HarnessState::HarnessState(const Harness& harness, ProbeRegistry* registry)
    : harness_(&harness), trace_(harness.functions(), registry) {
  reset();
}

void HarnessState::reset() {
  slots_.assign(harness_->pools().size(), {});
  for (std::size_t p = 0; p < slots_.size(); ++p) {
    slots_[p].assign(harness_->pools()[p].capacity, std::nullopt);
  }
  sut_state_ = harness_->make_sut_state();
  poisoned_ = false;
  step_count_ = 0;
  trace_.begin_step();
}

template <class F>
void HarnessState::for_each_tuple(const ActionClass& cls, F&& f) const {
  const std::size_t arity = cls.consumes.size();
  std::vector<std::uint32_t> tuple(arity, 0);
  std::vector<const std::any*> values(arity, nullptr);

  // Odometer over initialized slots of each consumed pool.
  auto advance_to_initialized = [&](std::size_t k, std::uint32_t from) -> bool {
    const auto& pool = slots_[cls.consumes[k]];
    for (std::uint32_t s = from; s < pool.size(); ++s) {
      if (pool[s]) {
        tuple[k] = s;
        values[k] = &*pool[s];
        return true;
      }
    }
    return false;
  };

  for (std::size_t k = 0; k < arity; ++k) {
    if (!advance_to_initialized(k, 0)) return;
  }
  while (true) {
    if (!cls.spec.guard || cls.spec.guard(Args(values))) {
      if (!f(std::span<const std::uint32_t>(tuple))) return;
    }
    std::size_t k = arity;
    while (k > 0) {
      --k;
      if (advance_to_initialized(k, tuple[k] + 1)) {
        for (std::size_t j = k + 1; j < arity; ++j) advance_to_initialized(j, 0);
        break;
      }
      if (k == 0) return;
    }
    if (arity == 0) return;
  }
}

std::uint64_t HarnessState::tuple_count(const ActionClass& cls) const {
  if (!cls.spec.guard) {
    std::uint64_t n = 1;
    for (PoolIndex p : cls.consumes) {
      n *= static_cast<std::uint64_t>(
          std::count_if(slots_[p].begin(), slots_[p].end(), [](const auto& s) { return s.has_value(); }));
    }
    return n;
  }
  std::uint64_t n = 0;
  for_each_tuple(cls, [&](std::span<const std::uint32_t>) {
    ++n;
    return true;
  });
  return n;
}

std::uint64_t HarnessState::action_count(ClassIndex c) const {
  const ActionClass& cls = harness_->action_class(c);
  const std::uint64_t tuples = tuple_count(cls);
  if (tuples == 0) return 0;
  const std::uint64_t produced = cls.produces ? harness_->pools()[*cls.produces].capacity : 1;
  const std::uint64_t values = cls.spec.domain_size > 0 ? cls.spec.domain_size : 1;
  return tuples * produced * values;
}

std::vector<EnabledClass> HarnessState::enabled_actions(const ClassMask& mask) const {
  std::vector<EnabledClass> out;
  for (ClassIndex c = 0; c < harness_->class_count(); ++c) {
    if (!mask.empty() && !mask[c]) continue;
    if (auto n = action_count(c); n > 0) out.push_back({c, n});
  }
  return out;
}

TestStep HarnessState::resolve(ClassIndex c, std::uint64_t which) const {
  const ActionClass& cls = harness_->action_class(c);
  const std::uint64_t produced = cls.produces ? harness_->pools()[*cls.produces].capacity : 1;
  const std::uint64_t values = cls.spec.domain_size > 0 ? cls.spec.domain_size : 1;
  const std::uint64_t per_tuple = produced * values;
  std::uint64_t tuple_index = which / per_tuple;
  const std::uint64_t rest = which % per_tuple;

  TestStep step;
  step.class_index = c;
  bool found = false;
  for_each_tuple(cls, [&](std::span<const std::uint32_t> tuple) {
    if (tuple_index-- == 0) {
      step.slots.assign(tuple.begin(), tuple.end());
      found = true;
      return false;
    }
    return true;
  });
  if (!found) throw StepNotEnabled("action index out of range for class '" + cls.id() + "'");
  if (cls.produces) step.slots.push_back(static_cast<std::uint32_t>(rest / values));
  step.value = cls.spec.domain_size > 0 ? static_cast<std::uint32_t>(rest % values) : 0;
  return step;
}

bool HarnessState::is_enabled(const TestStep& step) const {
  if (step.class_index >= harness_->class_count()) return false;
  const ActionClass& cls = harness_->action_class(step.class_index);
  const std::size_t expected = cls.consumes.size() + (cls.produces ? 1 : 0);
  if (step.slots.size() != expected) return false;
  std::vector<const std::any*> values;
  values.reserve(cls.consumes.size());
  for (std::size_t k = 0; k < cls.consumes.size(); ++k) {
    const auto& pool = slots_[cls.consumes[k]];
    if (step.slots[k] >= pool.size() || !pool[step.slots[k]]) return false;
    values.push_back(&*pool[step.slots[k]]);
  }
  if (cls.produces && step.slots.back() >= harness_->pools()[*cls.produces].capacity) return false;
  if (cls.spec.domain_size > 0 ? step.value >= cls.spec.domain_size : step.value != 0) return false;
  return !cls.spec.guard || cls.spec.guard(Args(values));
}

StepOutcome HarnessState::execute(const TestStep& step) {
  if (poisoned_) throw PoisonedState("harness state must be reset after a failure");
  if (!is_enabled(step)) {
    throw StepNotEnabled("step of class #" + std::to_string(step.class_index) +
                         " is not enabled at position " + std::to_string(step_count_));
  }
  const ActionClass& cls = harness_->action_class(step.class_index);

  std::vector<const std::any*> values;
  values.reserve(cls.consumes.size());
  for (std::size_t k = 0; k < cls.consumes.size(); ++k) {
    values.push_back(&*slots_[cls.consumes[k]][step.slots[k]]);
  }

  StepOutcome outcome;
  trace_.begin_step();
  StepContext ctx(Args(values), step.value, trace_, sut_state_);
  try {
    cls.spec.executor(ctx);
    if (ctx.failure()) {
      outcome.status = StepStatus::property_violation;
      outcome.signature = ctx.failure();
    }
  } catch (const SutError& e) {
    outcome.status = StepStatus::sut_error;
    outcome.signature = FaultSignature{cls.id(), e.category()};
  } catch (const std::exception&) {
    outcome.status = StepStatus::sut_error;
    outcome.signature = FaultSignature{cls.id(), "unhandled-exception"};
  }

  const auto functions = harness_->functions();
  outcome.entered.reserve(trace_.entered().size());
  for (FunctionId fn : trace_.entered()) outcome.entered.push_back({fn, functions[fn].loc});
  trace_.begin_step();

  if (outcome.status == StepStatus::ok && ctx.produced()) {
    slots_[*cls.produces][step.slots.back()] = std::move(*ctx.produced());
  }

  const PoolView view(slots_);
  for (const auto& property : harness_->properties()) {
    ++property_evaluations_;
    std::optional<std::string> broken;
    try {
      broken = property.check(view, trace_);
    } catch (const std::exception&) {
      broken = "exception";
    }
    if (broken && outcome.status == StepStatus::ok) {
      outcome.status = StepStatus::property_violation;
      outcome.signature = FaultSignature{property.id, *broken};
    }
  }
  trace_.begin_step();

  ++step_count_;
  if (outcome.status != StepStatus::ok) poisoned_ = true;
  return outcome;
}

ReplayResult replay(const Harness& harness, const TestCase& test, ProbeRegistry* registry) {
  for (const auto& step : test.steps) {
    if (step.class_index >= harness.class_count()) {
      throw UnknownActionClass("test references action class #" +
                               std::to_string(step.class_index) + " not in harness '" +
                               harness.id() + "'");
    }
  }
  HarnessState state(harness, registry);
  ReplayResult result;
  for (const auto& step : test.steps) {
    StepOutcome outcome = state.execute(step);
    ++result.steps_executed;
    if (outcome.status != StepStatus::ok) {
      result.status = outcome.status;
      result.signature = outcome.signature;
      break;
    }
  }
  return result;
}

}  // namespace locbias
