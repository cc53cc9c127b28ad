#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace locbias {

enum class ProbeKind { branch, stmt };

// Distinct-probe coverage at a point in time. Id vectors are sorted and
// duplicate-free, so the counts are their sizes.
struct CoverageSnapshot {
  std::vector<std::uint32_t> branch_ids;
  std::vector<std::uint32_t> stmt_ids;

  std::size_t branches() const { return branch_ids.size(); }
  std::size_t statements() const { return stmt_ids.size(); }

  friend bool operator==(const CoverageSnapshot&, const CoverageSnapshot&) = default;
};

// Componentwise set union.
CoverageSnapshot merge(const CoverageSnapshot& a, const CoverageSnapshot& b);

// Per-trial statement/branch hit registry. Hits are binary (no counts). When
// disabled, probe() returns immediately and the hit sets never grow.
//
// Besides the trial-wide sets the registry tracks how many distinct probes
// were hit since the last begin_test(), which the genetic strategy uses as
// test fitness.
class ProbeRegistry {
 public:
  explicit ProbeRegistry(bool enabled = true, std::size_t branch_capacity = 0,
                         std::size_t stmt_capacity = 0);

  void probe(ProbeKind kind, std::uint32_t id);
  void hit_branch(std::uint32_t id) { probe(ProbeKind::branch, id); }
  void hit_stmt(std::uint32_t id) { probe(ProbeKind::stmt, id); }

  bool enabled() const { return enabled_; }
  void set_enabled(bool enabled) { enabled_ = enabled; }

  std::size_t branch_count() const { return branch_count_; }
  std::size_t stmt_count() const { return stmt_count_; }

  CoverageSnapshot snapshot() const;

  void begin_test();
  std::size_t test_hits() const { return test_hits_; }

 private:
  struct Layer {
    // 0 = never hit in this trial; otherwise the test epoch of the last hit.
    std::vector<std::uint32_t> stamp;
  };

  bool mark(Layer& layer, std::uint32_t id);

  bool enabled_;
  Layer branches_;
  Layer stmts_;
  std::size_t branch_count_ = 0;
  std::size_t stmt_count_ = 0;
  std::uint32_t epoch_ = 1;
  std::size_t test_hits_ = 0;
};

using FunctionId = std::uint32_t;

struct FunctionInfo {
  std::string name;
  std::uint32_t loc = 0;
  // Functions that belong to the harness rather than the SUT are invisible to
  // the entry hook.
  bool harness_owned = false;
};

// What instrumented SUT code talks to: coverage probes plus the
// function-entry hook used for LOC sampling. One per HarnessState.
class TraceContext {
 public:
  TraceContext() = default;
  TraceContext(std::span<const FunctionInfo> functions, ProbeRegistry* registry);

  // Function-entry hook. Records each SUT function at most once per step.
  void enter(FunctionId fn) {
    if (!tracing_ || fn >= seen_.size() || seen_[fn] != 0) return;
    seen_[fn] = 1;
    entered_.push_back(fn);
  }

  // Records the outcome of decision `decision` as branch probe
  // 2*decision + taken, and passes `taken` through.
  bool branch(std::uint32_t decision, bool taken) {
    if (registry_ != nullptr) registry_->hit_branch(2 * decision + (taken ? 1 : 0));
    return taken;
  }

  void stmt(std::uint32_t id) {
    if (registry_ != nullptr) registry_->hit_stmt(id);
  }

  void set_registry(ProbeRegistry* registry) { registry_ = registry; }
  ProbeRegistry* registry() const { return registry_; }

  void set_tracing(bool on) { tracing_ = on; }
  bool tracing() const { return tracing_; }

  // Clears the per-step entry record.
  void begin_step();
  const std::vector<FunctionId>& entered() const { return entered_; }

 private:
  ProbeRegistry* registry_ = nullptr;
  bool tracing_ = true;
  std::vector<std::uint8_t> seen_;
  std::vector<FunctionId> entered_;
};

}  // namespace locbias
