#include "locbias/strategies.hpp"

#include <algorithm>
#include <numeric>

namespace locbias {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::random: return "random";
    case StrategyKind::loc: return "loc";
    case StrategyKind::swarm: return "swarm";
    case StrategyKind::ga: return "ga";
    case StrategyKind::swarm_loc: return "swarm-loc";
    case StrategyKind::ga_loc: return "ga-loc";
  }
  return "?";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view text) {
  for (auto k : {StrategyKind::random, StrategyKind::loc, StrategyKind::swarm, StrategyKind::ga,
                 StrategyKind::swarm_loc, StrategyKind::ga_loc}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

bool uses_loc(StrategyKind kind) {
  return kind == StrategyKind::loc || kind == StrategyKind::swarm_loc ||
         kind == StrategyKind::ga_loc;
}

void StrategyConfig::validate() const {
  if (uses_loc(kind) && !table) {
    throw StrategyError("strategy '" + std::string(to_string(kind)) + "' needs a LOC table");
  }
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!is_prob(swarm_disable_prob)) throw StrategyError("swarm disable probability out of [0,1]");
  if (!is_prob(ga.fresh_prob)) throw StrategyError("GA fresh probability out of [0,1]");
  if (ga.population_cap == 0 || ga.elite_k == 0) {
    throw StrategyError("GA population cap and elite size must be positive");
  }
  if (ga.mutate_weight < 0 || ga.crossover_weight < 0 || ga.extend_weight < 0 ||
      ga.mutate_weight + ga.crossover_weight + ga.extend_weight <= 0) {
    throw StrategyError("GA operator weights must be non-negative with a positive sum");
  }
}

StrategyConfig compose_loc(StrategyKind base, ProbabilityTable table) {
  StrategyConfig config;
  switch (base) {
    case StrategyKind::random: config.kind = StrategyKind::loc; break;
    case StrategyKind::swarm: config.kind = StrategyKind::swarm_loc; break;
    case StrategyKind::ga: config.kind = StrategyKind::ga_loc; break;
    default: config.kind = base; break;
  }
  config.table = std::move(table);
  return config;
}

std::string pick_class_at(const ProbabilityTable& table, std::span<const std::string> enabled,
                          double u) {
  if (enabled.empty()) throw StrategyError("pick_class: no enabled class");
  std::vector<std::pair<std::string_view, double>> restricted;
  for (const auto& id : enabled) {
    if (!table.contains(id)) {
      throw StrategyError("pick_class: class '" + id + "' not in probability table");
    }
    restricted.emplace_back(id, table.at(id));
  }
  std::sort(restricted.begin(), restricted.end());
  restricted.erase(std::unique(restricted.begin(), restricted.end()), restricted.end());

  double total = 0;
  for (const auto& r : restricted) total += r.second;
  if (total <= 0) {
    return std::string(restricted[static_cast<std::size_t>(u * static_cast<double>(restricted.size()))].first);
  }
  const double target = u * total;
  double cumulative = 0;
  for (const auto& r : restricted) {
    cumulative += r.second;
    if (target < cumulative) return std::string(r.first);
  }
  // Rounding left target at the top edge; take the last class with mass.
  for (auto it = restricted.rbegin(); it != restricted.rend(); ++it) {
    if (it->second > 0) return std::string(it->first);
  }
  return std::string(restricted.back().first);
}

std::string pick_class(const ProbabilityTable& table, std::span<const std::string> enabled,
                       Rng& rng) {
  return pick_class_at(table, enabled, rng.uniform01());
}

ClassPicker::ClassPicker(const Harness& harness, const ProbabilityTable& table)
    : weights_(table.aligned(harness)), rank_(harness.class_count()) {
  std::vector<ClassIndex> order(harness.class_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](ClassIndex a, ClassIndex b) {
    return harness.action_class(a).id() < harness.action_class(b).id();
  });
  for (std::uint32_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
}

ClassIndex ClassPicker::pick(std::span<const EnabledClass> enabled, Rng& rng) const {
  return pick_at(enabled, rng.uniform01());
}

ClassIndex ClassPicker::pick_at(std::span<const EnabledClass> enabled, double u) const {
  if (enabled.empty()) throw StrategyError("pick_class: no enabled class");
  // Lay the enabled weights out in id order.
  scratch_.assign(rank_.size(), 0.0);
  by_rank_.assign(rank_.size(), kNone);
  auto& by_rank = by_rank_;
  double total = 0;
  for (const auto& e : enabled) {
    scratch_[rank_[e.class_index]] = weights_[e.class_index];
    by_rank[rank_[e.class_index]] = e.class_index;
    total += weights_[e.class_index];
  }
  if (total <= 0) {
    return enabled[static_cast<std::size_t>(u * static_cast<double>(enabled.size()))].class_index;
  }
  const double target = u * total;
  double cumulative = 0;
  ClassIndex last_positive = enabled.front().class_index;
  for (std::size_t r = 0; r < scratch_.size(); ++r) {
    if (by_rank[r] == kNone || scratch_[r] <= 0) continue;
    cumulative += scratch_[r];
    last_positive = by_rank[r];
    if (target < cumulative) return by_rank[r];
  }
  return last_positive;
}

DependencyGraph dependency_graph(const Harness& harness) {
  const std::size_t n = harness.class_count();
  std::vector<std::vector<ClassIndex>> producers(harness.pools().size());
  for (ClassIndex c = 0; c < n; ++c) {
    if (auto p = harness.action_class(c).produces) producers[*p].push_back(c);
  }
  DependencyGraph graph;
  graph.parents.resize(n);
  for (ClassIndex b = 0; b < n; ++b) {
    for (PoolIndex p : harness.action_class(b).consumes) {
      if (producers[p].size() != 1) continue;
      const ClassIndex a = producers[p].front();
      auto& ps = graph.parents[b];
      if (a != b && std::find(ps.begin(), ps.end(), a) == ps.end()) ps.push_back(a);
    }
  }
  return graph;
}

bool swarm_viable(const Harness& harness, const ClassMask& enabled) {
  std::vector<bool> fillable(harness.pools().size(), false);
  std::vector<bool> fires(harness.class_count(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (ClassIndex c = 0; c < harness.class_count(); ++c) {
      if (fires[c] || !enabled[c]) continue;
      const auto& cls = harness.action_class(c);
      const bool ready = std::all_of(cls.consumes.begin(), cls.consumes.end(),
                                     [&](PoolIndex p) { return fillable[p]; });
      if (!ready) continue;
      fires[c] = true;
      changed = true;
      if (cls.produces) fillable[*cls.produces] = true;
    }
  }
  for (ClassIndex c = 0; c < harness.class_count(); ++c) {
    if (fires[c] && harness.action_class(c).kind() == ActionKind::sut_call) return true;
  }
  return false;
}

SwarmConfig swarm_config(const Harness& harness, const DependencyGraph& graph, Rng& rng,
                         double disable_prob, bool force_parents, std::size_t max_attempts) {
  const std::size_t n = harness.class_count();
  SwarmConfig config;
  while (config.attempts < max_attempts) {
    ++config.attempts;
    config.drawn.assign(n, false);
    for (ClassIndex c = 0; c < n; ++c) {
      config.drawn[c] = !rng.bernoulli(disable_prob);
      config.drawn_enabled += config.drawn[c];
    }
    config.enabled = config.drawn;
    if (force_parents) {
      std::vector<ClassIndex> work;
      for (ClassIndex c = 0; c < n; ++c) {
        if (config.enabled[c]) work.push_back(c);
      }
      while (!work.empty()) {
        const ClassIndex c = work.back();
        work.pop_back();
        for (ClassIndex parent : graph.parents[c]) {
          if (!config.enabled[parent]) {
            config.enabled[parent] = true;
            work.push_back(parent);
          }
        }
      }
    }
    if (swarm_viable(harness, config.enabled)) return config;
  }
  throw StrategyError("swarm: no viable configuration after " + std::to_string(max_attempts) +
                      " draws for harness '" + harness.id() + "'");
}

std::string_view to_string(GaOp op) {
  switch (op) {
    case GaOp::fresh: return "fresh";
    case GaOp::mutate: return "mutate";
    case GaOp::crossover: return "crossover";
    case GaOp::extend: return "extend";
  }
  return "?";
}

std::vector<TestStep> crossover(std::span<const TestStep> a, std::size_t cut_a,
                                std::span<const TestStep> b, std::size_t cut_b) {
  cut_a = std::min(cut_a, a.size());
  cut_b = std::min(cut_b, b.size());
  std::vector<TestStep> out(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut_a));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(cut_b), b.end());
  return out;
}

GaPlan ga_propose(const GaPopulation& population, const GaParams& params,
                  std::size_t max_length, Rng& rng) {
  GaPlan plan;
  plan.target_length = max_length;
  if (population.members.empty()) return plan;
  if (rng.uniform01() < params.fresh_prob) return plan;

  // Elites: highest fitness first, older first among equals.
  std::vector<const GaMember*> ranked;
  ranked.reserve(population.members.size());
  for (const auto& m : population.members) ranked.push_back(&m);
  std::sort(ranked.begin(), ranked.end(), [](const GaMember* x, const GaMember* y) {
    return x->fitness != y->fitness ? x->fitness > y->fitness : x->age < y->age;
  });
  const std::size_t elites = std::min(params.elite_k, ranked.size());
  auto parent = [&]() -> const std::vector<TestStep>& {
    return ranked[rng.below(elites)]->test.steps;
  };

  const double total = params.mutate_weight + params.crossover_weight + params.extend_weight;
  const double r = rng.uniform01() * total;
  if (r < params.mutate_weight) {
    plan.op = GaOp::mutate;
    const auto& p = parent();
    if (p.empty()) return plan;
    const std::size_t length = std::min(p.size(), max_length);
    const std::size_t pos = rng.below(length);
    plan.prefix.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(pos));
    plan.target_length = length;
  } else if (r < params.mutate_weight + params.crossover_weight) {
    plan.op = GaOp::crossover;
    const auto& a = parent();
    const auto& b = parent();
    const std::size_t cut_a = rng.below(a.size() + 1);
    const std::size_t cut_b = rng.below(b.size() + 1);
    plan.prefix = crossover(a, cut_a, b, cut_b);
    if (plan.prefix.size() > max_length) plan.prefix.resize(max_length);
    plan.target_length = std::max<std::size_t>(1, plan.prefix.size());
  } else {
    plan.op = GaOp::extend;
    const auto& p = parent();
    plan.prefix.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(std::min(p.size(), max_length)));
    plan.target_length = max_length;
  }
  return plan;
}

void ga_update(GaPopulation& population, TestCase executed, std::size_t fitness,
               const GaParams& params) {
  population.members.push_back({std::move(executed), fitness, population.inserted++});
  while (population.members.size() > params.population_cap) {
    auto victim = std::min_element(
        population.members.begin(), population.members.end(),
        [](const GaMember& x, const GaMember& y) {
          return x.fitness != y.fitness ? x.fitness < y.fitness : x.age < y.age;
        });
    population.members.erase(victim);
  }
}

namespace {

std::optional<TestStep> random_step(const HarnessState& state, const ClassPicker& picker,
                                    const ClassMask& mask, Rng& rng) {
  const auto enabled = state.enabled_actions(mask);
  if (enabled.empty()) return std::nullopt;
  const ClassIndex c = picker.pick(enabled, rng);
  const auto it = std::find_if(enabled.begin(), enabled.end(),
                               [c](const EnabledClass& e) { return e.class_index == c; });
  return state.resolve(c, rng.below(it->count));
}

ProbabilityTable table_for(const StrategyConfig& config, const Harness& harness) {
  if (uses_loc(config.kind)) return *config.table;
  return ProbabilityTable::uniform(harness.class_ids());
}

class RandomStrategy final : public Strategy {
 public:
  RandomStrategy(const Harness& harness, const ProbabilityTable& table)
      : picker_(harness, table) {}

  void begin_test(const HarnessState&, Rng&) override {}

  std::optional<TestStep> next_step(const HarnessState& state, Rng& rng) override {
    return random_step(state, picker_, {}, rng);
  }

 private:
  ClassPicker picker_;
};

class SwarmStrategy final : public Strategy {
 public:
  SwarmStrategy(const Harness& harness, const StrategyConfig& config)
      : harness_(harness),
        picker_(harness, table_for(config, harness)),
        graph_(dependency_graph(harness)),
        disable_prob_(config.swarm_disable_prob),
        force_parents_(config.swarm_force_parents) {}

  void begin_test(const HarnessState&, Rng& rng) override {
    mask_ = swarm_config(harness_, graph_, rng, disable_prob_, force_parents_).enabled;
  }

  std::optional<TestStep> next_step(const HarnessState& state, Rng& rng) override {
    return random_step(state, picker_, mask_, rng);
  }

 private:
  const Harness& harness_;
  ClassPicker picker_;
  DependencyGraph graph_;
  double disable_prob_;
  bool force_parents_;
  ClassMask mask_;
};

class GaStrategy final : public Strategy {
 public:
  GaStrategy(const Harness& harness, const StrategyConfig& config, std::size_t max_length)
      : picker_(harness, table_for(config, harness)), params_(config.ga), max_length_(max_length) {}

  void begin_test(const HarnessState&, Rng& rng) override {
    plan_ = ga_propose(population_, params_, max_length_, rng);
    replaying_ = true;
  }

  std::optional<TestStep> next_step(const HarnessState& state, Rng& rng) override {
    const std::size_t pos = state.step_count();
    if (pos >= plan_.target_length) return std::nullopt;
    if (replaying_ && pos < plan_.prefix.size()) {
      if (state.is_enabled(plan_.prefix[pos])) return plan_.prefix[pos];
      replaying_ = false;  // repair: regenerate the rest
    }
    return random_step(state, picker_, {}, rng);
  }

  void end_test(const TestCase& executed, std::size_t fitness) override {
    ga_update(population_, executed, fitness, params_);
  }

  bool wants_fitness() const override { return true; }

  const GaPopulation& population() const { return population_; }

 private:
  ClassPicker picker_;
  GaParams params_;
  std::size_t max_length_;
  GaPopulation population_;
  GaPlan plan_;
  bool replaying_ = false;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(const StrategyConfig& config, const Harness& harness,
                                        std::size_t max_test_length) {
  config.validate();
  switch (config.kind) {
    case StrategyKind::random:
    case StrategyKind::loc:
      return std::make_unique<RandomStrategy>(harness, table_for(config, harness));
    case StrategyKind::swarm:
    case StrategyKind::swarm_loc:
      return std::make_unique<SwarmStrategy>(harness, config);
    case StrategyKind::ga:
    case StrategyKind::ga_loc:
      return std::make_unique<GaStrategy>(harness, config, max_test_length);
  }
  throw StrategyError("unknown strategy kind");
}

}  // namespace locbias
