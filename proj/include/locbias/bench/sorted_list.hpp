#pragma once

#include <memory>
#include <span>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/coverage.hpp"

namespace locbias::bench {

// Instrumented sorted multiset of ints stored as a list of short sorted
// sublists. Two seeded faults: slice reads drop their last element when the
// list holds more than 5 elements and the slice continues into a later
// sublist; union loses an element when both inputs hold more than 8.
class SortedList {
 public:
  enum Fn : FunctionId {
    kCtor,
    kAdd,
    kLocate,
    kExpand,
    kRemove,
    kPosition,
    kAt,
    kSlice,
    kCount,
    kCopy,
    kMergeUnion,
    kRebuild,
    kFnCount
  };

  struct Faults {
    bool slice = false;
    bool merge = false;
  };

  static std::span<const FunctionLoc> functions();
  static std::size_t branch_probes();
  static std::size_t stmt_probes();

  SortedList(TraceContext& tc, Faults faults);

  void add(TraceContext& tc, int value);
  // Removes one occurrence; false when absent.
  bool remove(TraceContext& tc, int value);
  // Precondition: index < size().
  int at(TraceContext& tc, std::size_t index) const;
  // Elements with positions in [start, stop), clamped to the size.
  std::vector<int> slice(TraceContext& tc, std::size_t start, std::size_t stop) const;
  std::size_t count(TraceContext& tc, int value) const;
  std::shared_ptr<SortedList> copy(TraceContext& tc) const;
  // Multiset sum of both lists.
  std::shared_ptr<SortedList> merge_union(TraceContext& tc, const SortedList& other) const;

  std::size_t size() const { return size_; }
  std::size_t sublists() const { return lists_.size(); }
  // Uninstrumented flattening for oracles.
  std::vector<int> to_vector() const;

  // Sublists longer than this are split in half.
  static constexpr std::size_t kMaxSublist = 4;

 private:
  struct Pos {
    std::size_t list;
    std::size_t offset;
  };

  std::size_t locate(TraceContext& tc, int value) const;
  void expand(TraceContext& tc, std::size_t k);
  Pos position(TraceContext& tc, std::size_t index) const;
  void rebuild(TraceContext& tc, const std::vector<int>& sorted);

  std::vector<std::vector<int>> lists_;
  std::vector<int> maxes_;
  std::size_t size_ = 0;
  Faults faults_;
};

}  // namespace locbias::bench
