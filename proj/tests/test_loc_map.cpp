#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "locbias/bench/bench.hpp"
#include "locbias/loc_map.hpp"
#include "support/toy_harness.hpp"

using namespace locbias;

namespace {

LocMap map_of(const std::vector<double>& means) {
  LocMap m;
  m.harness_id = "t";
  for (std::size_t i = 0; i < means.size(); ++i) {
    std::string id = "c";
    id += static_cast<char>('a' + i);
    if (means[i] > 0) {
      m.entries[id] = {means[i], 1};
    } else {
      m.entries[id] = {0.0, 3};
    }
  }
  return m;
}

std::vector<double> probs_of(const ProbabilityTable& t) {
  std::vector<double> out;
  for (const auto& [id, p] : t.probs) out.push_back(p);
  return out;
}

}  // namespace

TEST(LocDistribution, FirstWorkedExample) {
  const auto p = probs_of(loc_distribution(map_of({0, 30, 20})));
  const std::vector<double> expected{0.20, 0.48, 0.32};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], expected[i], 1e-12);
}

TEST(LocDistribution, SecondWorkedExample) {
  const auto t = loc_distribution(map_of({0, 0, 30, 20, 14}));
  EXPECT_EQ(t.m0, 2u);
  EXPECT_DOUBLE_EQ(t.m1, 64);
  const auto p = probs_of(t);
  const std::vector<double> expected{0.100, 0.100, 0.375, 0.250, 0.175};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(p[i], expected[i], 1e-12);
}

TEST(LocDistribution, AllZeroIsUniform) {
  for (double p : probs_of(loc_distribution(map_of({0, 0, 0, 0})))) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(LocDistribution, NoZeroClassIsProportional) {
  const auto p = probs_of(loc_distribution(map_of({10, 30})));
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_DOUBLE_EQ(p[1], 0.75);
}

TEST(LocDistribution, UnsampledClassesJoinTheZeroGroup) {
  LocMap m = map_of({30, 20});
  m.unsampled.insert("zz");
  const auto t = loc_distribution(m);
  EXPECT_EQ(t.m0, 1u);
  EXPECT_NEAR(t.at("zz"), 0.2, 1e-15);
  EXPECT_NEAR(t.at("ca"), 0.48, 1e-15);
}

TEST(LocDistribution, EmptyMapThrows) { EXPECT_THROW(loc_distribution(LocMap{}), LocMapError); }

TEST(LocDistribution, RandomMapsKeepInvariants) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> means(n);
    for (auto& m : means) m = rng() % 3 == 0 ? 0.0 : static_cast<double>(rng() % 10000) / 7.0;
    const auto t = loc_distribution(map_of(means));
    double total = 0, zero_mass = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = t.probs[i].second;
      EXPECT_GE(p, 0.0);
      total += p;
      if (means[i] == 0) zero_mass += p;
      for (std::size_t j = 0; j < n; ++j) {
        if (means[i] > 0 && means[j] > 0 && means[i] > means[j]) {
          EXPECT_GT(p, t.probs[j].second);
        }
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    if (t.m0 > 0 && t.m1 > 0) {
      EXPECT_NEAR(zero_mass, 0.2, 1e-9);
    }
  }
}

TEST(ProbabilityTable, AlignedFollowsHarnessOrder) {
  auto h = toy::toy_harness();
  const auto t = ProbabilityTable::uniform(h->class_ids());
  const auto aligned = t.aligned(*h);
  ASSERT_EQ(aligned.size(), h->class_count());
  for (double p : aligned) EXPECT_DOUBLE_EQ(p, 1.0 / static_cast<double>(h->class_count()));
  EXPECT_THROW(ProbabilityTable::uniform({"int_init"}).aligned(*h), LocMapError);
  EXPECT_THROW(t.at("missing"), LocMapError);
}

TEST(Sampling, CountsEachFunctionOncePerStep) {
  auto h = toy::toy_harness();
  const LocMap m = sample_loc(*h, 5000, 1);
  EXPECT_DOUBLE_EQ(m.entries.at("gh").mean_loc, 20.0);
  EXPECT_DOUBLE_EQ(m.entries.at("f40").mean_loc, 30.0);
  EXPECT_DOUBLE_EQ(m.entries.at("int_init").mean_loc, 0.0);
  EXPECT_GT(m.entries.at("int_init").samples, 0u);
  EXPECT_DOUBLE_EQ(m.entries.at("box_new").mean_loc, 0.0);
  EXPECT_TRUE(m.unsampled.empty());
}

TEST(Sampling, RandomEntrySetsAverageOut) {
  auto h = toy::toy_harness();
  const LocMap m = sample_loc(*h, 120000, 2);
  ASSERT_GE(m.entries.at("mixed").samples, 10000u);
  EXPECT_NEAR(m.entries.at("mixed").mean_loc, 22.0, 1.0);
}

TEST(Sampling, NoClassRepeatsWhileAnEnabledClassIsUnsampled) {
  auto h = bench::avl_harness();
  SamplingOptions o;
  o.budget = Budget::actions(2000);
  o.seed = 4;
  const auto r = sample_loc_traced(*h, o);
  for (const auto& c : r.trace) {
    if (c.unsampled_enabled) {
      EXPECT_TRUE(c.chosen_unsampled);
    }
  }
  EXPECT_EQ(r.actions, 2000u);
  EXPECT_EQ(r.map.class_ids(), [&] {
    auto ids = h->class_ids();
    std::sort(ids.begin(), ids.end());
    return ids;
  }());
}

TEST(Sampling, UnreachableClassesStayUnsampled) {
  auto h = std::make_shared<Harness>("orphan");
  h->add_pool("never", 1);
  h->add_pool("x", 1);
  h->add_class({.id = "x_init", .kind = ActionKind::value_init, .produces = "x", .domain_size = 1,
                .executor = [](StepContext& ctx) { ctx.produce(1); }});
  h->add_class({.id = "use", .consumes = {"never"}, .executor = [](StepContext&) {}});
  const LocMap m = sample_loc(*h, 100, 0);
  EXPECT_EQ(m.unsampled, (std::set<std::string>{"use"}));
  EXPECT_DOUBLE_EQ(m.mean("use"), 0.0);
}

TEST(Sampling, IsDeterministic) {
  auto h = bench::heap_harness();
  EXPECT_EQ(sample_loc(*h, 3000, 9), sample_loc(*h, 3000, 9));
}

TEST(StaticLoc, SumsBoundFunctionsWithoutClosure) {
  const std::map<std::string, std::uint32_t> fns{{"f", 30}, {"w", 2}, {"h", 40}};
  const auto m = static_loc(fns, {{"a", {"f"}}, {"wrap", {"w"}}, {"both", {"f", "w"}}, {"none", {}}});
  EXPECT_DOUBLE_EQ(m.mean("a"), 30);
  EXPECT_DOUBLE_EQ(m.mean("wrap"), 2);
  EXPECT_DOUBLE_EQ(m.mean("both"), 32);
  EXPECT_DOUBLE_EQ(m.mean("none"), 0);
  EXPECT_EQ(m.entries.at("a").samples, 1u);
  EXPECT_THROW(static_loc(fns, {{"a", {"zz"}}}), LocMapError);
}

TEST(StaticLoc, FromHarnessBindings) {
  auto h = toy::toy_harness();
  const auto m = static_loc(*h);
  EXPECT_DOUBLE_EQ(m.mean("gh"), 6);  // only g is bound
  EXPECT_DOUBLE_EQ(m.mean("f40"), 30);
  EXPECT_DOUBLE_EQ(m.mean("int_init"), 0);
}

TEST(Persistence, RoundTrip) {
  auto h = bench::avl_harness();
  const LocMap m = sample_loc(*h, 1000, 3);
  std::stringstream buf;
  save_locmap(m, buf);
  const auto loaded = load_locmap(buf, *h);
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(loaded.map, m);
}

TEST(Persistence, OutputIsStableJson) {
  LocMap m = map_of({0, 12.5});
  m.unsampled.insert("cc");
  std::stringstream buf;
  save_locmap(m, buf);
  EXPECT_EQ(buf.str(),
            "{\n"
            "  \"classes\": [\n"
            "    {\n      \"id\": \"ca\",\n      \"mean_loc\": 0.0,\n      \"samples\": 3\n    },\n"
            "    {\n      \"id\": \"cb\",\n      \"mean_loc\": 12.5,\n      \"samples\": 1\n    },\n"
            "    {\n      \"id\": \"cc\",\n      \"mean_loc\": 0.0,\n      \"samples\": 0\n    }\n"
            "  ],\n"
            "  \"harness-id\": \"t\",\n"
            "  \"version\": 1\n"
            "}\n");
}

TEST(Persistence, RetiredAndNewClasses) {
  auto h = toy::toy_harness();
  std::stringstream buf(R"({"version": 1, "harness-id": "toy", "classes": [
    {"id": "old_op", "mean_loc": 5, "samples": 2},
    {"id": "gh", "mean_loc": 20, "samples": 4}]})");
  const auto loaded = load_locmap(buf, *h);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_NE(loaded.warnings[0].find("old_op"), std::string::npos);
  EXPECT_FALSE(loaded.map.entries.contains("old_op"));
  EXPECT_TRUE(loaded.map.unsampled.contains("f40"));
  const auto t = loc_distribution(loaded.map);
  double total = 0;
  for (const auto& [id, p] : t.probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_NEAR(t.at("gh"), 0.8, 1e-12);
}

TEST(Persistence, RejectsBadFiles) {
  auto h = toy::toy_harness();
  auto load = [&](const std::string& text) {
    std::stringstream buf(text);
    return load_locmap(buf, *h);
  };
  EXPECT_THROW(load("not json"), LocMapError);
  EXPECT_THROW(load(R"({"version": 2, "harness-id": "toy", "classes": []})"), LocMapError);
  EXPECT_THROW(load(R"({"harness-id": "toy", "classes": []})"), LocMapError);
  EXPECT_THROW(load(R"({"version": 1, "harness-id": "toy", "classes": [{"id": "gh", "mean_loc": -1, "samples": 1}]})"),
               LocMapError);
  EXPECT_EQ(load(R"({"version": 1, "harness-id": "other", "classes": []})").warnings.size(), 1u);
  EXPECT_THROW(load_locmap(std::string("/nonexistent/dir/x.json"), *h), LocMapError);
}
