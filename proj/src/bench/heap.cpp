#include "locbias/bench/heap.hpp"

#include <bit>
#include <utility>

namespace locbias::bench {

namespace {

enum Decision : std::uint32_t {
  kReserveGrow,
  kReserveDouble,
  kSiftUpRoot,
  kSiftUpOrdered,
  kPopLast,
  kSiftDownLeaf,
  kSiftDownRight,
  kSiftDownOrdered,
  kSiftDownFaulty,
  kDecisionCount
};

enum Stmt : std::uint32_t {
  kSCtor,
  kSPush,
  kSReserve,
  kSReserveGrow,
  kSSiftUp,
  kSSiftUpSwap,
  kSPop,
  kSPopMove,
  kSSiftDown,
  kSSiftDownSwap,
  kSSiftDownFault,
  kSPeek,
  kStmtCount
};

// Pops from heaps smaller than this sift correctly even with the fault on.
constexpr std::size_t kFaultMinSize = 6;

constexpr FunctionLoc kFunctions[] = {
    {"Heap::Heap", 5},
    {"Heap::push", 7},
    {"Heap::reserve_slot", 11},
    {"Heap::sift_up", 11},
    {"Heap::pop", 12},
    {"Heap::sift_down", 24},
    {"Heap::peek", 5},
};
static_assert(std::size(kFunctions) == Heap::kFnCount);

}  // namespace

std::span<const FunctionLoc> Heap::functions() { return kFunctions; }
std::size_t Heap::branch_probes() { return 2 * kDecisionCount; }
std::size_t Heap::stmt_probes() { return kStmtCount; }

// @fn Heap::Heap
Heap::Heap(TraceContext& tc, bool sift_fault) : sift_fault_(sift_fault) {
  tc.enter(kCtor);
  tc.stmt(kSCtor);
  data_.resize(4);
}

// @fn Heap::push
void Heap::push(TraceContext& tc, int value) {
  tc.enter(kPush);
  tc.stmt(kSPush);
  const std::size_t slot = reserve_slot(tc);
  data_[slot] = value;
  sift_up(tc, slot);
}

// @fn Heap::reserve_slot
std::size_t Heap::reserve_slot(TraceContext& tc) {
  tc.enter(kReserveSlot);
  tc.stmt(kSReserve);
  if (tc.branch(kReserveGrow, size_ == data_.size())) {
    tc.stmt(kSReserveGrow);
    const bool small = tc.branch(kReserveDouble, data_.size() < 64);
    const std::size_t grown = small ? 2 * data_.size() : data_.size() + data_.size() / 2;
    data_.resize(grown);
  }
  return size_++;
}

// @fn Heap::sift_up
void Heap::sift_up(TraceContext& tc, std::size_t i) {
  tc.enter(kSiftUp);
  tc.stmt(kSSiftUp);
  while (!tc.branch(kSiftUpRoot, i == 0)) {
    const std::size_t parent = (i - 1) / 2;
    if (tc.branch(kSiftUpOrdered, data_[parent] <= data_[i])) break;
    tc.stmt(kSSiftUpSwap);
    std::swap(data_[parent], data_[i]);
    i = parent;
  }
}

// @fn Heap::pop
int Heap::pop(TraceContext& tc) {
  tc.enter(kPop);
  tc.stmt(kSPop);
  const std::size_t popped_from = size_;
  const int top = data_[0];
  --size_;
  if (tc.branch(kPopLast, size_ == 0)) return top;
  tc.stmt(kSPopMove);
  data_[0] = data_[size_];
  sift_down(tc, 0, popped_from);
  return top;
}

// @fn Heap::sift_down
void Heap::sift_down(TraceContext& tc, std::size_t i, std::size_t popped_from) {
  tc.enter(kSiftDown);
  tc.stmt(kSSiftDown);
  // First index of the deepest level.
  const std::size_t bottom = std::bit_floor(size_) - 1;
  while (true) {
    std::size_t child = 2 * i + 1;
    if (tc.branch(kSiftDownLeaf, child >= size_)) break;
    const std::size_t right = child + 1;
    if (tc.branch(kSiftDownRight, right < size_ && data_[right] < data_[child])) {
      child = right;
    }
    if (tc.branch(kSiftDownOrdered, data_[i] <= data_[child])) break;
    if (tc.branch(kSiftDownFaulty,
                  sift_fault_ && popped_from >= kFaultMinSize && child >= bottom)) {
      // Seeded fault: never sinks into the deepest level.
      tc.stmt(kSSiftDownFault);
      break;
    }
    tc.stmt(kSSiftDownSwap);
    std::swap(data_[i], data_[child]);
    i = child;
  }
}

// @fn Heap::peek
int Heap::peek(TraceContext& tc) const {
  tc.enter(kPeek);
  tc.stmt(kSPeek);
  return data_[0];
}

bool Heap::ordered() const {
  for (std::size_t i = 1; i < size_; ++i) {
    if (data_[(i - 1) / 2] > data_[i]) return false;
  }
  return true;
}

}  // namespace locbias::bench
