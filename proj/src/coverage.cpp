#include "locbias/coverage.hpp"

#include <algorithm>
#include <iterator>

namespace locbias {

namespace {

std::vector<std::uint32_t> set_union(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::uint32_t> hit_ids(const std::vector<std::uint32_t>& stamp) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < stamp.size(); ++i) {
    if (stamp[i] != 0) ids.push_back(i);
  }
  return ids;
}

}  // namespace

CoverageSnapshot merge(const CoverageSnapshot& a, const CoverageSnapshot& b) {
  return {set_union(a.branch_ids, b.branch_ids), set_union(a.stmt_ids, b.stmt_ids)};
}

ProbeRegistry::ProbeRegistry(bool enabled, std::size_t branch_capacity,
                             std::size_t stmt_capacity)
    : enabled_(enabled) {
  branches_.stamp.assign(branch_capacity, 0);
  stmts_.stamp.assign(stmt_capacity, 0);
}

bool ProbeRegistry::mark(Layer& layer, std::uint32_t id) {
  if (id >= layer.stamp.size()) layer.stamp.resize(id + 1, 0);
  std::uint32_t& s = layer.stamp[id];
  if (s == epoch_) return false;
  const bool first_in_trial = (s == 0);
  s = epoch_;
  ++test_hits_;
  return first_in_trial;
}

void ProbeRegistry::probe(ProbeKind kind, std::uint32_t id) {
  if (!enabled_) return;
  if (kind == ProbeKind::branch) {
    if (mark(branches_, id)) ++branch_count_;
  } else {
    if (mark(stmts_, id)) ++stmt_count_;
  }
}

CoverageSnapshot ProbeRegistry::snapshot() const {
  return {hit_ids(branches_.stamp), hit_ids(stmts_.stamp)};
}

void ProbeRegistry::begin_test() {
  ++epoch_;
  test_hits_ = 0;
}

TraceContext::TraceContext(std::span<const FunctionInfo> functions, ProbeRegistry* registry)
    : registry_(registry), seen_(functions.size(), 0) {
  // Harness-owned functions are pre-marked so enter() ignores them.
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].harness_owned) seen_[i] = 2;
  }
}

void TraceContext::begin_step() {
  for (FunctionId fn : entered_) seen_[fn] = 0;
  entered_.clear();
}

}  // namespace locbias
