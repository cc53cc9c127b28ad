#include "locbias/bench/avl_tree.hpp"

#include <algorithm>
#include <functional>

namespace locbias::bench {

namespace {

enum Decision : std::uint32_t {
  kInsEmpty,
  kInsLess,
  kInsGreater,
  kRemMissing,
  kRemLess,
  kRemGreater,
  kRemTwoChildren,
  kRemHasLeft,
  kTakeMinLeft,
  kRebLeftHeavy,
  kRebLeftRight,
  kRebRightHeavy,
  kRebRightLeft,
  kRebFaulty,
  kHeightNull,
  kRenderNull,
  kRenderSeparator,
  kCheckNull,
  kCheckSkew,
  kCheckHeight,
  kDecisionCount
};

enum Stmt : std::uint32_t {
  kSCtor,
  kSInsert,
  kSInsertNew,
  kSInsertRecurse,
  kSRemove,
  kSRemoveFound,
  kSRemoveSuccessor,
  kSRemoveSplice,
  kSTakeMin,
  kSRebalance,
  kSRebLeftRight,
  kSRebRightLeft,
  kSRebFault,
  kSRotateLeft,
  kSRotateRight,
  kSUpdateHeight,
  kSDisplay,
  kSRender,
  kSCheck,
  kSCheckNode,
  kStmtCount
};

// On the insert path, trees holding fewer keys than this rebalance correctly
// even with the fault on.
constexpr std::size_t kFaultMinSize = 5;

constexpr FunctionLoc kFunctions[] = {
    {"AvlTree::AvlTree", 5},
    {"AvlTree::insert", 5},
    {"AvlTree::insert_at", 19},
    {"AvlTree::remove", 7},
    {"AvlTree::remove_at", 29},
    {"AvlTree::take_min", 12},
    {"AvlTree::rebalance", 31},
    {"AvlTree::rotate_left", 10},
    {"AvlTree::rotate_right", 10},
    {"AvlTree::height_of", 4},
    {"AvlTree::update_height", 5},
    {"AvlTree::display", 7},
    {"AvlTree::render", 9},
    {"AvlTree::check_balanced", 7},
    {"AvlTree::check_node", 11},
};
static_assert(std::size(kFunctions) == AvlTree::kFnCount);

}  // namespace

std::span<const FunctionLoc> AvlTree::functions() { return kFunctions; }
std::size_t AvlTree::branch_probes() { return 2 * kDecisionCount; }
std::size_t AvlTree::stmt_probes() { return kStmtCount; }

// @fn AvlTree::AvlTree
AvlTree::AvlTree(TraceContext& tc, bool rotation_fault)
    : rotation_fault_(rotation_fault) {
  tc.enter(kCtor);
  tc.stmt(kSCtor);
}

// @fn AvlTree::insert
void AvlTree::insert(TraceContext& tc, int key) {
  tc.enter(kInsert);
  tc.stmt(kSInsert);
  insert_at(tc, root_, key);
}

// @fn AvlTree::insert_at
void AvlTree::insert_at(TraceContext& tc, Link& node, int key) {
  tc.enter(kInsertAt);
  if (tc.branch(kInsEmpty, node == nullptr)) {
    tc.stmt(kSInsertNew);
    node = std::make_unique<Node>();
    node->key = key;
    ++size_;
    return;
  }
  tc.stmt(kSInsertRecurse);
  if (tc.branch(kInsLess, key < node->key)) {
    insert_at(tc, node->left, key);
  } else if (tc.branch(kInsGreater, key > node->key)) {
    insert_at(tc, node->right, key);
  } else {
    return;  // already present
  }
  rebalance(tc, node);
}

// @fn AvlTree::remove
void AvlTree::remove(TraceContext& tc, int key) {
  tc.enter(kRemove);
  tc.stmt(kSRemove);
  removing_ = true;
  remove_at(tc, root_, key);
  removing_ = false;
}

// @fn AvlTree::remove_at
void AvlTree::remove_at(TraceContext& tc, Link& node, int key) {
  tc.enter(kRemoveAt);
  if (tc.branch(kRemMissing, node == nullptr)) return;
  if (tc.branch(kRemLess, key < node->key)) {
    remove_at(tc, node->left, key);
  } else if (tc.branch(kRemGreater, key > node->key)) {
    remove_at(tc, node->right, key);
  } else {
    tc.stmt(kSRemoveFound);
    --size_;
    if (tc.branch(kRemTwoChildren, node->left != nullptr && node->right != nullptr)) {
      // Replace with the in-order successor.
      tc.stmt(kSRemoveSuccessor);
      Link successor = take_min(tc, node->right);
      successor->left = std::move(node->left);
      successor->right = std::move(node->right);
      node = std::move(successor);
    } else {
      tc.stmt(kSRemoveSplice);
      if (tc.branch(kRemHasLeft, node->left != nullptr)) {
        node = std::move(node->left);
      } else {
        node = std::move(node->right);
      }
    }
  }
  if (node == nullptr) return;
  rebalance(tc, node);
}

// @fn AvlTree::take_min
AvlTree::Link AvlTree::take_min(TraceContext& tc, Link& node) {
  tc.enter(kTakeMin);
  tc.stmt(kSTakeMin);
  if (tc.branch(kTakeMinLeft, node->left != nullptr)) {
    Link min = take_min(tc, node->left);
    rebalance(tc, node);
    return min;
  }
  Link min = std::move(node);
  node = std::move(min->right);
  return min;
}

// @fn AvlTree::rebalance
void AvlTree::rebalance(TraceContext& tc, Link& node) {
  tc.enter(kRebalance);
  tc.stmt(kSRebalance);
  update_height(tc, *node);
  const int balance = height_of(tc, node->left) - height_of(tc, node->right);
  if (tc.branch(kRebLeftHeavy, balance > 1)) {
    const Node& left = *node->left;
    if (tc.branch(kRebLeftRight, height_of(tc, left.left) < height_of(tc, left.right))) {
      tc.stmt(kSRebLeftRight);
      rotate_left(tc, node->left);
    }
    rotate_right(tc, node);
    return;
  }
  if (tc.branch(kRebRightHeavy, balance < -1)) {
    const Node& right = *node->right;
    if (tc.branch(kRebRightLeft, height_of(tc, right.left) > height_of(tc, right.right))) {
      tc.stmt(kSRebRightLeft);
      if (tc.branch(kRebFaulty, rotation_fault_ && (removing_ || size_ >= kFaultMinSize))) {
        // Seeded fault: only the inner rotation runs, leaving the node right-heavy.
        tc.stmt(kSRebFault);
        rotate_right(tc, node->right);
        update_height(tc, *node);
        return;
      }
      rotate_right(tc, node->right);
    }
    rotate_left(tc, node);
    return;
  }
}

// @fn AvlTree::rotate_left
void AvlTree::rotate_left(TraceContext& tc, Link& node) {
  tc.enter(kRotateLeft);
  tc.stmt(kSRotateLeft);
  Link pivot = std::move(node->right);
  node->right = std::move(pivot->left);
  update_height(tc, *node);
  pivot->left = std::move(node);
  update_height(tc, *pivot);
  node = std::move(pivot);
}

// @fn AvlTree::rotate_right
void AvlTree::rotate_right(TraceContext& tc, Link& node) {
  tc.enter(kRotateRight);
  tc.stmt(kSRotateRight);
  Link pivot = std::move(node->left);
  node->left = std::move(pivot->right);
  update_height(tc, *node);
  pivot->right = std::move(node);
  update_height(tc, *pivot);
  node = std::move(pivot);
}

// @fn AvlTree::height_of
int AvlTree::height_of(TraceContext& tc, const Link& node) {
  tc.enter(kHeightOf);
  return tc.branch(kHeightNull, node == nullptr) ? 0 : node->height;
}

// @fn AvlTree::update_height
void AvlTree::update_height(TraceContext& tc, Node& node) {
  tc.enter(kUpdateHeight);
  tc.stmt(kSUpdateHeight);
  node.height = 1 + std::max(height_of(tc, node.left), height_of(tc, node.right));
}

// @fn AvlTree::display
std::string AvlTree::display(TraceContext& tc) const {
  tc.enter(kDisplay);
  tc.stmt(kSDisplay);
  std::string out = "[";
  render(tc, root_, out);
  return out + "]";
}

// @fn AvlTree::render
void AvlTree::render(TraceContext& tc, const Link& node, std::string& out) {
  tc.enter(kRender);
  if (tc.branch(kRenderNull, node == nullptr)) return;
  tc.stmt(kSRender);
  render(tc, node->left, out);
  if (tc.branch(kRenderSeparator, out.size() > 1)) out += ", ";
  out += std::to_string(node->key);
  render(tc, node->right, out);
}

// @fn AvlTree::check_balanced
bool AvlTree::check_balanced(TraceContext& tc) const {
  tc.enter(kCheckBalanced);
  tc.stmt(kSCheck);
  bool ok = true;
  check_node(tc, root_, ok);
  return ok;
}

// @fn AvlTree::check_node
int AvlTree::check_node(TraceContext& tc, const Link& node, bool& ok) {
  tc.enter(kCheckNode);
  if (tc.branch(kCheckNull, node == nullptr)) return 0;
  tc.stmt(kSCheckNode);
  const int lh = check_node(tc, node->left, ok);
  const int rh = check_node(tc, node->right, ok);
  if (tc.branch(kCheckSkew, lh - rh > 1 || rh - lh > 1)) ok = false;
  const int h = 1 + std::max(lh, rh);
  if (tc.branch(kCheckHeight, h != node->height)) ok = false;
  return h;
}

std::vector<int> AvlTree::keys() const {
  std::vector<int> out;
  std::function<void(const Link&)> walk = [&](const Link& n) {
    if (!n) return;
    walk(n->left);
    out.push_back(n->key);
    walk(n->right);
  };
  walk(root_);
  return out;
}

int AvlTree::height() const { return root_ ? root_->height : 0; }

}  // namespace locbias::bench
