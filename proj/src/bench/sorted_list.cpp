#include "locbias/bench/sorted_list.hpp"

#include <algorithm>

namespace locbias::bench {

namespace {

enum Decision : std::uint32_t {
  kAddEmpty,
  kAddPastEnd,
  kAddSplit,
  kLocateHit,
  kExpandTail,
  kRemoveMissingList,
  kRemoveMissingValue,
  kRemoveDropList,
  kPositionAdvance,
  kSliceClamp,
  kSliceEmpty,
  kSliceFaulty,
  kSliceMore,
  kCountMissing,
  kCountSpill,
  kCopyEmpty,
  kMergeTakeLeft,
  kMergeLeftDone,
  kMergeFaulty,
  kMergeRightDone,
  kRebuildChunk,
  kDecisionCount
};

enum Stmt : std::uint32_t {
  kSCtor,
  kSAdd,
  kSAddFirst,
  kSAddAppend,
  kSAddInsert,
  kSLocate,
  kSExpand,
  kSRemove,
  kSRemoveErase,
  kSRemoveDrop,
  kSRemoveShrink,
  kSPosition,
  kSAt,
  kSSlice,
  kSSliceChunk,
  kSSliceFault,
  kSCount,
  kSCountSpill,
  kSCopy,
  kSMerge,
  kSMergeLeftTail,
  kSMergeRightTail,
  kSMergeFault,
  kSRebuild,
  kStmtCount
};

// Size thresholds below which the seeded faults stay latent.
constexpr std::size_t kSliceFaultMinSize = 6;
constexpr std::size_t kMergeFaultMinSize = 9;

constexpr FunctionLoc kFunctions[] = {
    {"SortedList::SortedList", 4},
    {"SortedList::add", 24},
    {"SortedList::locate", 7},
    {"SortedList::expand", 12},
    {"SortedList::remove", 21},
    {"SortedList::position", 10},
    {"SortedList::at", 6},
    {"SortedList::slice", 29},
    {"SortedList::count", 17},
    {"SortedList::copy", 10},
    {"SortedList::merge_union", 35},
    {"SortedList::rebuild", 14},
};
static_assert(std::size(kFunctions) == SortedList::kFnCount);

}  // namespace

std::span<const FunctionLoc> SortedList::functions() { return kFunctions; }
std::size_t SortedList::branch_probes() { return 2 * kDecisionCount; }
std::size_t SortedList::stmt_probes() { return kStmtCount; }

// @fn SortedList::SortedList
SortedList::SortedList(TraceContext& tc, Faults faults) : faults_(faults) {
  tc.enter(kCtor);
  tc.stmt(kSCtor);
}

// @fn SortedList::add
void SortedList::add(TraceContext& tc, int value) {
  tc.enter(kAdd);
  tc.stmt(kSAdd);
  if (tc.branch(kAddEmpty, lists_.empty())) {
    tc.stmt(kSAddFirst);
    lists_.push_back({value});
    maxes_.push_back(value);
    ++size_;
    return;
  }
  std::size_t k = locate(tc, value);
  if (tc.branch(kAddPastEnd, k == lists_.size())) {
    tc.stmt(kSAddAppend);
    k = lists_.size() - 1;
    lists_[k].push_back(value);
    maxes_[k] = value;
  } else {
    tc.stmt(kSAddInsert);
    auto& sub = lists_[k];
    sub.insert(std::upper_bound(sub.begin(), sub.end(), value), value);
  }
  ++size_;
  if (tc.branch(kAddSplit, lists_[k].size() > kMaxSublist)) expand(tc, k);
}

// @fn SortedList::locate
std::size_t SortedList::locate(TraceContext& tc, int value) const {
  tc.enter(kLocate);
  tc.stmt(kSLocate);
  const auto it = std::lower_bound(maxes_.begin(), maxes_.end(), value);
  tc.branch(kLocateHit, it != maxes_.end() && *it == value);
  return static_cast<std::size_t>(it - maxes_.begin());
}

// @fn SortedList::expand
void SortedList::expand(TraceContext& tc, std::size_t k) {
  tc.enter(kExpand);
  tc.stmt(kSExpand);
  auto& sub = lists_[k];
  const auto half = static_cast<std::ptrdiff_t>(sub.size() / 2);
  std::vector<int> tail(sub.begin() + half, sub.end());
  sub.erase(sub.begin() + half, sub.end());
  maxes_[k] = sub.back();
  tc.branch(kExpandTail, k + 1 == lists_.size());
  maxes_.insert(maxes_.begin() + static_cast<std::ptrdiff_t>(k) + 1, tail.back());
  lists_.insert(lists_.begin() + static_cast<std::ptrdiff_t>(k) + 1, std::move(tail));
}

// @fn SortedList::remove
bool SortedList::remove(TraceContext& tc, int value) {
  tc.enter(kRemove);
  tc.stmt(kSRemove);
  const std::size_t k = locate(tc, value);
  if (tc.branch(kRemoveMissingList, k == lists_.size())) return false;
  auto& sub = lists_[k];
  const auto it = std::lower_bound(sub.begin(), sub.end(), value);
  if (tc.branch(kRemoveMissingValue, *it != value)) return false;
  tc.stmt(kSRemoveErase);
  sub.erase(it);
  --size_;
  if (tc.branch(kRemoveDropList, sub.empty())) {
    tc.stmt(kSRemoveDrop);
    lists_.erase(lists_.begin() + static_cast<std::ptrdiff_t>(k));
    maxes_.erase(maxes_.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    tc.stmt(kSRemoveShrink);
    maxes_[k] = sub.back();
  }
  return true;
}

// @fn SortedList::position
SortedList::Pos SortedList::position(TraceContext& tc, std::size_t index) const {
  tc.enter(kPosition);
  tc.stmt(kSPosition);
  std::size_t k = 0;
  while (tc.branch(kPositionAdvance, index >= lists_[k].size())) {
    index -= lists_[k].size();
    ++k;
  }
  return {k, index};
}

// @fn SortedList::at
int SortedList::at(TraceContext& tc, std::size_t index) const {
  tc.enter(kAt);
  tc.stmt(kSAt);
  const Pos p = position(tc, index);
  return lists_[p.list][p.offset];
}

// @fn SortedList::slice
std::vector<int> SortedList::slice(TraceContext& tc, std::size_t start, std::size_t stop) const {
  tc.enter(kSlice);
  tc.stmt(kSSlice);
  std::vector<int> out;
  if (tc.branch(kSliceClamp, stop > size_)) stop = size_;
  if (tc.branch(kSliceEmpty, start >= stop)) return out;
  const Pos first = position(tc, start);
  std::size_t remaining = stop - start;
  std::size_t k = first.list;
  std::size_t offset = first.offset;
  do {
    tc.stmt(kSSliceChunk);
    const auto& sub = lists_[k];
    std::size_t take = std::min(remaining, sub.size() - offset);
    if (tc.branch(kSliceFaulty, faults_.slice && size_ >= kSliceFaultMinSize &&
                                    k != first.list && take == remaining)) {
      // Seeded fault: the closing chunk stops one element short.
      tc.stmt(kSSliceFault);
      --take;
      --remaining;
    }
    const auto begin = sub.begin() + static_cast<std::ptrdiff_t>(offset);
    out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(take));
    remaining -= take;
    offset = 0;
    ++k;
  } while (tc.branch(kSliceMore, remaining > 0));
  return out;
}

// @fn SortedList::count
std::size_t SortedList::count(TraceContext& tc, int value) const {
  tc.enter(kCount);
  tc.stmt(kSCount);
  std::size_t k = locate(tc, value);
  if (tc.branch(kCountMissing, k == lists_.size())) return 0;
  std::size_t n = 0;
  while (k < lists_.size()) {
    const auto& sub = lists_[k];
    const auto [lo, hi] = std::equal_range(sub.begin(), sub.end(), value);
    n += static_cast<std::size_t>(hi - lo);
    // Equal values may continue into the next sublist.
    if (!tc.branch(kCountSpill, sub.back() == value)) break;
    tc.stmt(kSCountSpill);
    ++k;
  }
  return n;
}

// @fn SortedList::copy
std::shared_ptr<SortedList> SortedList::copy(TraceContext& tc) const {
  tc.enter(kCopy);
  tc.stmt(kSCopy);
  auto out = std::make_shared<SortedList>(tc, faults_);
  if (tc.branch(kCopyEmpty, size_ == 0)) return out;
  out->lists_ = lists_;
  out->maxes_ = maxes_;
  out->size_ = size_;
  return out;
}

// @fn SortedList::merge_union
std::shared_ptr<SortedList> SortedList::merge_union(TraceContext& tc,
                                                    const SortedList& other) const {
  tc.enter(kMergeUnion);
  tc.stmt(kSMerge);
  const std::vector<int> a = to_vector();
  const std::vector<int> b = other.to_vector();
  std::vector<int> merged;
  merged.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (tc.branch(kMergeTakeLeft, a[i] <= b[j])) {
      merged.push_back(a[i++]);
    } else {
      merged.push_back(b[j++]);
    }
  }
  if (tc.branch(kMergeLeftDone, i == a.size())) {
    tc.stmt(kSMergeRightTail);
    if (tc.branch(kMergeFaulty, faults_.merge && a.size() >= kMergeFaultMinSize &&
                                    b.size() >= kMergeFaultMinSize)) {
      // Seeded fault: the right tail is copied from one past its start.
      tc.stmt(kSMergeFault);
      ++j;
    }
    for (; j < b.size(); ++j) merged.push_back(b[j]);
  }
  if (tc.branch(kMergeRightDone, j == b.size())) {
    tc.stmt(kSMergeLeftTail);
    for (; i < a.size(); ++i) merged.push_back(a[i]);
  }
  auto out = std::make_shared<SortedList>(tc, faults_);
  out->rebuild(tc, merged);
  return out;
}

// @fn SortedList::rebuild
void SortedList::rebuild(TraceContext& tc, const std::vector<int>& sorted) {
  tc.enter(kRebuild);
  tc.stmt(kSRebuild);
  lists_.clear();
  maxes_.clear();
  size_ = sorted.size();
  constexpr std::size_t kChunk = kMaxSublist - 1;
  for (std::size_t i = 0; tc.branch(kRebuildChunk, i < sorted.size()); i += kChunk) {
    const std::size_t end = std::min(sorted.size(), i + kChunk);
    lists_.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                        sorted.begin() + static_cast<std::ptrdiff_t>(end));
    maxes_.push_back(lists_.back().back());
  }
}

std::vector<int> SortedList::to_vector() const {
  std::vector<int> out;
  out.reserve(size_);
  for (const auto& sub : lists_) out.insert(out.end(), sub.begin(), sub.end());
  return out;
}

}  // namespace locbias::bench
