#include <gtest/gtest.h>

#include <algorithm>

#include "locbias/bench/bench.hpp"
#include "locbias/harness.hpp"
#include "support/toy_harness.hpp"

using namespace locbias;
using locbias::toy::toy_harness;

namespace {

std::vector<std::string> enabled_ids(const HarnessState& s) {
  std::vector<std::string> ids;
  for (const auto& e : s.enabled_actions()) ids.push_back(s.harness().action_class(e.class_index).id());
  return ids;
}

TestStep step_of(const Harness& h, std::string_view id, std::vector<std::uint32_t> slots,
                 std::uint32_t value = 0) {
  return {h.class_index(id), std::move(slots), value};
}

}  // namespace

TEST(HarnessDefinition, RejectsMalformedDeclarations) {
  Harness h("x");
  h.add_pool("p", 1);
  EXPECT_THROW(h.add_pool("p", 2), HarnessError);
  EXPECT_THROW(h.add_pool("q", 0), HarnessError);
  EXPECT_THROW(Harness(""), HarnessError);
  auto noop = [](StepContext&) {};
  EXPECT_THROW(h.add_class({.id = "v", .kind = ActionKind::value_init, .produces = "p", .executor = noop}),
               HarnessError);
  EXPECT_THROW(h.add_class({.id = "v", .kind = ActionKind::value_init, .consumes = {"p"},
                            .produces = "p", .domain_size = 2, .executor = noop}),
               HarnessError);
  EXPECT_THROW(h.add_class({.id = "c", .consumes = {"missing"}, .executor = noop}), HarnessError);
  EXPECT_THROW(h.add_class({.id = "bad id", .executor = noop}), HarnessError);
  EXPECT_THROW(h.add_class({.id = "c"}), HarnessError);
  h.add_class({.id = "c", .executor = noop});
  EXPECT_THROW(h.add_class({.id = "c", .executor = noop}), HarnessError);
  EXPECT_THROW(h.add_property({"a:b", [](const PoolView&, TraceContext&) { return std::nullopt; }}),
               HarnessError);
  EXPECT_THROW(h.add_function("f", 1); h.add_function("f", 2), HarnessError);
}

TEST(HarnessDefinition, HarnessOwnedFunctionsCarryZeroLoc) {
  toy::ToyIds ids;
  auto h = toy_harness(100, &ids);
  EXPECT_EQ(h->functions()[ids.helper].loc, 0u);
  EXPECT_TRUE(h->functions()[ids.helper].harness_owned);
}

TEST(EnabledActions, AvlFreshStateOffersOnlyConstructors) {
  auto h = bench::avl_harness();
  HarnessState s(*h);
  EXPECT_EQ(enabled_ids(s), (std::vector<std::string>{"int_init", "avl_new"}));
  const auto enabled = s.enabled_actions();
  EXPECT_EQ(enabled[0].count, 4u * 20u);  // slot x value
  EXPECT_EQ(enabled[1].count, 3u);
}

TEST(EnabledActions, AvlWithOneIntAndOneTreeEnablesEverything) {
  auto h = bench::avl_harness();
  HarnessState s(*h);
  s.execute(step_of(*h, "int_init", {2}, 6));
  s.execute(step_of(*h, "avl_new", {1}));
  EXPECT_EQ(enabled_ids(s), (std::vector<std::string>{"int_init", "avl_new", "insert", "delete", "display"}));
  for (const auto& e : s.enabled_actions()) {
    const auto& id = h->action_class(e.class_index).id();
    if (id == "insert" || id == "delete" || id == "display") {
      EXPECT_EQ(e.count, 1u) << id;
    }
  }
}

TEST(EnabledActions, EmptyHarnessHasNothing) {
  Harness h("empty");
  HarnessState s(h);
  EXPECT_TRUE(s.enabled_actions().empty());
}

TEST(EnabledActions, MaskFiltersClasses) {
  auto h = toy_harness();
  HarnessState s(*h);
  ClassMask mask(h->class_count(), false);
  mask[h->class_index("box_new")] = true;
  const auto enabled = s.enabled_actions(mask);
  ASSERT_EQ(enabled.size(), 1u);
  EXPECT_EQ(enabled[0].class_index, h->class_index("box_new"));
}

TEST(EnabledActions, CountsMatchResolvableSteps) {
  auto h = bench::avl_harness();
  HarnessState s(*h);
  s.execute(step_of(*h, "int_init", {0}, 3));
  s.execute(step_of(*h, "int_init", {3}, 9));
  s.execute(step_of(*h, "avl_new", {0}));
  s.execute(step_of(*h, "avl_new", {2}));
  for (const auto& e : s.enabled_actions()) {
    std::vector<TestStep> seen;
    for (std::uint64_t k = 0; k < e.count; ++k) {
      const TestStep step = s.resolve(e.class_index, k);
      EXPECT_TRUE(s.is_enabled(step));
      seen.push_back(step);
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      for (std::size_t j = i + 1; j < seen.size(); ++j) EXPECT_FALSE(seen[i] == seen[j]);
    }
    EXPECT_THROW(s.resolve(e.class_index, e.count), StepNotEnabled);
  }
}

TEST(Execute, ValueInitTouchesNoSutCode) {
  auto h = bench::avl_harness();
  ProbeRegistry reg;
  HarnessState s(*h, &reg);
  const auto out = s.execute(step_of(*h, "int_init", {0}, 6));
  EXPECT_EQ(out.status, StepStatus::ok);
  EXPECT_FALSE(out.signature);
  EXPECT_TRUE(out.entered.empty());
  EXPECT_EQ(reg.branch_count() + reg.stmt_count(), 0u);
  EXPECT_TRUE(s.initialized(h->find_pool("int").value(), 0));
}

TEST(Execute, CorrectAvlInsertPassesProperties) {
  auto h = bench::avl_harness({{"bench.avl.fault.rotation", "off"}});
  HarnessState s(*h);
  s.execute(step_of(*h, "int_init", {0}, 4));
  s.execute(step_of(*h, "avl_new", {0}));
  const auto out = s.execute(step_of(*h, "insert", {0, 0}));
  EXPECT_EQ(out.status, StepStatus::ok);
  EXPECT_FALSE(out.entered.empty());
}

TEST(Execute, EnteredFunctionsAreDistinctAndExcludeHarnessCode) {
  toy::ToyIds ids;
  auto h = toy_harness(100, &ids);
  HarnessState s(*h);
  s.execute(step_of(*h, "box_new", {0}));
  const auto out = s.execute(step_of(*h, "gh", {0}));
  ASSERT_EQ(out.entered.size(), 2u);
  EXPECT_EQ(out.entered[0].id, ids.g);
  EXPECT_EQ(out.entered[1].id, ids.h);
  EXPECT_EQ(out.loc_sum(), 20u);
}

TEST(Execute, PropertiesRunOncePerStep) {
  auto h = toy_harness();
  HarnessState s(*h);
  s.execute(step_of(*h, "int_init", {0}, 1));
  s.execute(step_of(*h, "box_new", {0}));
  EXPECT_EQ(s.property_evaluations(), 2u);
  EXPECT_EQ(s.step_count(), 2u);
}

TEST(Execute, PropertyViolationPoisonsTheState) {
  auto h = toy_harness(3);
  HarnessState s(*h);
  const auto out = s.execute(step_of(*h, "int_init", {1}, 3));
  EXPECT_EQ(out.status, StepStatus::property_violation);
  EXPECT_EQ(out.signature->str(), "small:too-big");
  EXPECT_TRUE(s.poisoned());
  EXPECT_THROW(s.execute(step_of(*h, "int_init", {1}, 0)), PoisonedState);
  s.reset();
  EXPECT_FALSE(s.poisoned());
  EXPECT_EQ(s.step_count(), 0u);
  EXPECT_EQ(s.execute(step_of(*h, "int_init", {1}, 0)).status, StepStatus::ok);
}

TEST(Execute, SutErrorSignatureNamesTheClass) {
  auto h = toy_harness();
  HarnessState s(*h);
  s.execute(step_of(*h, "int_init", {0}, 4));
  const auto out = s.execute(step_of(*h, "boom", {0}));
  EXPECT_EQ(out.status, StepStatus::sut_error);
  EXPECT_EQ(out.signature->str(), "boom:boom");
}

TEST(Execute, DisabledStepIsRejected) {
  auto h = toy_harness();
  HarnessState s(*h);
  EXPECT_THROW(s.execute(step_of(*h, "gh", {0})), StepNotEnabled);
  EXPECT_THROW(s.execute(step_of(*h, "int_init", {0}, 5)), StepNotEnabled);
  EXPECT_THROW(s.execute(step_of(*h, "int_init", {2}, 0)), StepNotEnabled);
}

TEST(Reset, RestoresFreshEnabledness) {
  auto h = bench::avl_harness();
  HarnessState fresh(*h);
  const auto expected = fresh.enabled_actions();
  ProbeRegistry reg;
  HarnessState s(*h, &reg);
  s.execute(step_of(*h, "int_init", {0}, 1));
  s.execute(step_of(*h, "avl_new", {0}));
  s.execute(step_of(*h, "insert", {0, 0}));
  const auto covered = reg.snapshot();
  s.reset();
  EXPECT_EQ(s.enabled_actions(), expected);
  s.reset();
  EXPECT_EQ(s.enabled_actions(), expected);
  EXPECT_EQ(reg.snapshot(), covered);
}

TEST(Replay, EmptyTestIsOk) {
  auto h = toy_harness();
  const auto r = replay(*h, TestCase{});
  EXPECT_EQ(r.status, StepStatus::ok);
  EXPECT_EQ(r.steps_executed, 0u);
}

TEST(Replay, StopsAtFirstFailureAndIsDeterministic) {
  auto h = toy_harness();
  TestCase t{9, {step_of(*h, "int_init", {0}, 4), step_of(*h, "boom", {0}),
                 step_of(*h, "box_new", {0})}};
  for (int i = 0; i < 3; ++i) {
    const auto r = replay(*h, t);
    EXPECT_EQ(r.status, StepStatus::sut_error);
    EXPECT_EQ(r.signature->str(), "boom:boom");
    EXPECT_EQ(r.steps_executed, 2u);
  }
}

TEST(Replay, UnknownClassAndCorruptTestsAreErrors) {
  auto h = toy_harness();
  EXPECT_THROW(replay(*h, TestCase{0, {TestStep{99, {}, 0}}}), UnknownActionClass);
  EXPECT_THROW(replay(*h, TestCase{0, {step_of(*h, "gh", {0})}}), StepNotEnabled);
}

TEST(Signature, ParseRoundTrips) {
  const auto s = FaultSignature::parse("check_balanced:assertion");
  EXPECT_EQ(s.property, "check_balanced");
  EXPECT_EQ(s.category, "assertion");
  EXPECT_EQ(FaultSignature::parse(s.str()), s);
  EXPECT_THROW(FaultSignature::parse("nocolon"), std::invalid_argument);
}
