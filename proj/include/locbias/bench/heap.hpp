#pragma once

#include <span>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/coverage.hpp"

namespace locbias::bench {

// Instrumented binary min-heap of ints. With the sift-down fault on, popping
// from a heap of at least 6 elements leaves the moved element one level short
// of where it belongs.
class Heap {
 public:
  enum Fn : FunctionId {
    kCtor,
    kPush,
    kReserveSlot,
    kSiftUp,
    kPop,
    kSiftDown,
    kPeek,
    kFnCount
  };

  static std::span<const FunctionLoc> functions();
  static std::size_t branch_probes();
  static std::size_t stmt_probes();

  Heap(TraceContext& tc, bool sift_fault);

  void push(TraceContext& tc, int value);
  // Precondition: not empty.
  int pop(TraceContext& tc);
  int peek(TraceContext& tc) const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  // Uninstrumented heap-order check for oracles.
  bool ordered() const;

 private:
  std::size_t reserve_slot(TraceContext& tc);
  void sift_up(TraceContext& tc, std::size_t i);
  void sift_down(TraceContext& tc, std::size_t i, std::size_t popped_from);

  std::vector<int> data_;
  std::size_t size_ = 0;
  bool sift_fault_;
};

}  // namespace locbias::bench
