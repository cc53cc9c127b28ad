#include <gtest/gtest.h>

#include <random>

#include "locbias/coverage.hpp"

using namespace locbias;

TEST(Probe, RepeatedHitCountsOnce) {
  ProbeRegistry r;
  r.hit_branch(7);
  r.hit_branch(7);
  EXPECT_EQ(r.branch_count(), 1u);
  EXPECT_EQ(r.snapshot().branch_ids, (std::vector<std::uint32_t>{7}));
}

TEST(Probe, DisabledRegistryNeverGrows) {
  ProbeRegistry r(false, 4, 4);
  r.hit_branch(1);
  r.hit_stmt(2);
  EXPECT_EQ(r.branch_count(), 0u);
  EXPECT_EQ(r.stmt_count(), 0u);
  EXPECT_EQ(r.snapshot(), CoverageSnapshot{});
}

TEST(Probe, DistinctIdsAndKindsAreSeparate) {
  ProbeRegistry r;
  for (std::uint32_t id : {1u, 2u, 3u}) r.hit_branch(id);
  r.hit_stmt(1);
  EXPECT_EQ(r.branch_count(), 3u);
  EXPECT_EQ(r.stmt_count(), 1u);
}

TEST(Probe, IdsBeyondDeclaredCapacityStillCount) {
  ProbeRegistry r(true, 2, 0);
  r.hit_branch(40);
  r.hit_stmt(9);
  EXPECT_EQ(r.snapshot().branch_ids, (std::vector<std::uint32_t>{40}));
  EXPECT_EQ(r.snapshot().stmt_ids, (std::vector<std::uint32_t>{9}));
}

TEST(Probe, TestHitsResetPerTestButTrialSetsPersist) {
  ProbeRegistry r;
  r.begin_test();
  r.hit_branch(1);
  r.hit_branch(2);
  r.hit_branch(1);
  EXPECT_EQ(r.test_hits(), 2u);
  r.begin_test();
  EXPECT_EQ(r.test_hits(), 0u);
  r.hit_branch(1);
  r.hit_stmt(1);
  EXPECT_EQ(r.test_hits(), 2u);
  EXPECT_EQ(r.branch_count(), 2u);
}

TEST(Snapshot, IsACopy) {
  ProbeRegistry r;
  r.hit_stmt(3);
  const auto snap = r.snapshot();
  r.hit_stmt(4);
  EXPECT_EQ(snap.statements(), 1u);
  EXPECT_EQ(r.snapshot().statements(), 2u);
}

TEST(Snapshot, MergeIsUnion) {
  const CoverageSnapshot a{{1, 2}, {}}, b{{2, 3}, {5}};
  const auto m = merge(a, b);
  EXPECT_EQ(m.branch_ids, (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_EQ(m.branches(), 3u);
  EXPECT_EQ(m.stmt_ids, (std::vector<std::uint32_t>{5}));
  EXPECT_EQ(merge(a, CoverageSnapshot{}), a);
}

TEST(Snapshot, MergeLaws) {
  std::mt19937 rng(1);
  auto random_snapshot = [&] {
    ProbeRegistry r;
    for (int i = 0; i < 10; ++i) {
      r.hit_branch(rng() % 16);
      r.hit_stmt(rng() % 16);
    }
    return r.snapshot();
  };
  for (int round = 0; round < 100; ++round) {
    const auto a = random_snapshot(), b = random_snapshot(), c = random_snapshot();
    EXPECT_EQ(merge(a, b), merge(b, a));
    EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
    EXPECT_EQ(merge(a, a), a);
  }
}

TEST(Snapshot, CountsAreMonotoneWithinATrial) {
  ProbeRegistry r;
  std::mt19937 rng(2);
  std::size_t last_b = 0, last_s = 0;
  for (int i = 0; i < 500; ++i) {
    if (i % 37 == 0) r.begin_test();
    r.probe(rng() % 2 ? ProbeKind::branch : ProbeKind::stmt, rng() % 64);
    EXPECT_GE(r.branch_count(), last_b);
    EXPECT_GE(r.stmt_count(), last_s);
    last_b = r.branch_count();
    last_s = r.stmt_count();
    EXPECT_EQ(r.snapshot().branches(), last_b);
  }
}

TEST(Trace, BranchIdsEncodeDecisionAndOutcome) {
  ProbeRegistry r;
  TraceContext tc({}, &r);
  EXPECT_TRUE(tc.branch(3, true));
  EXPECT_FALSE(tc.branch(3, false));
  EXPECT_EQ(r.snapshot().branch_ids, (std::vector<std::uint32_t>{6, 7}));
}

TEST(Trace, EntriesAreDedupedPerStepAndHarnessCodeIsHidden) {
  const std::vector<FunctionInfo> fns{{"a", 3, false}, {"b", 0, true}};
  TraceContext tc(fns, nullptr);
  tc.enter(0);
  tc.enter(1);
  tc.enter(0);
  EXPECT_EQ(tc.entered(), (std::vector<FunctionId>{0}));
  tc.begin_step();
  EXPECT_TRUE(tc.entered().empty());
  tc.enter(0);
  EXPECT_EQ(tc.entered().size(), 1u);
  tc.enter(1);
  EXPECT_EQ(tc.entered().size(), 1u);
}

TEST(Trace, NoRegistryIsANoOp) {
  TraceContext tc;
  tc.stmt(1);
  EXPECT_TRUE(tc.branch(0, true));
}
