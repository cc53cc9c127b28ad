#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/coverage.hpp"

namespace locbias::bench {

// Instrumented AVL tree over int keys (set semantics). With the rotation
// fault on, the right-left imbalance case skips its outer rotation when it is
// reached after a delete, or after an insert into a tree of 5 or more keys.
class AvlTree {
 public:
  enum Fn : FunctionId {
    kCtor,
    kInsert,
    kInsertAt,
    kRemove,
    kRemoveAt,
    kTakeMin,
    kRebalance,
    kRotateLeft,
    kRotateRight,
    kHeightOf,
    kUpdateHeight,
    kDisplay,
    kRender,
    kCheckBalanced,
    kCheckNode,
    kFnCount
  };

  static std::span<const FunctionLoc> functions();
  static std::size_t branch_probes();
  static std::size_t stmt_probes();

  AvlTree(TraceContext& tc, bool rotation_fault);

  void insert(TraceContext& tc, int key);
  void remove(TraceContext& tc, int key);
  std::string display(TraceContext& tc) const;
  bool check_balanced(TraceContext& tc) const;

  // Uninstrumented accessors for oracles.
  std::vector<int> keys() const;
  int height() const;
  std::size_t size() const { return size_; }

 private:
  struct Node {
    int key;
    int height = 1;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;
  };
  using Link = std::unique_ptr<Node>;

  void insert_at(TraceContext& tc, Link& node, int key);
  void remove_at(TraceContext& tc, Link& node, int key);
  Link take_min(TraceContext& tc, Link& node);
  void rebalance(TraceContext& tc, Link& node);
  void rotate_left(TraceContext& tc, Link& node);
  void rotate_right(TraceContext& tc, Link& node);
  static int height_of(TraceContext& tc, const Link& node);
  static void update_height(TraceContext& tc, Node& node);
  static void render(TraceContext& tc, const Link& node, std::string& out);
  static int check_node(TraceContext& tc, const Link& node, bool& ok);

  Link root_;
  std::size_t size_ = 0;
  bool rotation_fault_;
  bool removing_ = false;
};

}  // namespace locbias::bench
