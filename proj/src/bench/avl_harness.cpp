#include <memory>
#include <set>
#include <sstream>

#include "locbias/bench/avl_tree.hpp"
#include "locbias/bench/bench.hpp"

namespace locbias::bench {

namespace {

// A tree under test and the ordered set it must agree with.
struct AvlCell {
  AvlCell(TraceContext& tc, bool fault) : tree(tc, fault) {}
  AvlTree tree;
  std::set<int> reference;
};

std::string render_reference(const std::set<int>& keys) {
  std::ostringstream out;
  out << '[';
  bool first = true;
  for (int k : keys) {
    if (!first) out << ", ";
    out << k;
    first = false;
  }
  out << ']';
  return out.str();
}

}  // namespace

std::shared_ptr<const Harness> avl_harness(const Settings& settings) {
  const bool fault = fault_enabled(settings, "avl", "rotation");
  auto h = std::make_shared<Harness>("avl");
  register_functions(*h, AvlTree::functions());
  h->set_probe_capacity(AvlTree::branch_probes(), AvlTree::stmt_probes());
  const PoolIndex avl_pool = h->add_pool("avl", 3);
  h->add_pool("int", 4);

  h->add_class({.id = "int_init",
                .kind = ActionKind::value_init,
                .produces = "int",
                .domain_size = 20,
                .executor = [](StepContext& ctx) { ctx.produce(static_cast<int>(ctx.choice()) + 1); }});

  h->add_class({.id = "avl_new",
                .kind = ActionKind::sut_call,
                .produces = "avl",
                .executor =
                    [fault](StepContext& ctx) {
                      ctx.produce_object(std::make_shared<AvlCell>(ctx.trace(), fault));
                    },
                .bound_functions = {"AvlTree::AvlTree"}});

  h->add_class({.id = "insert",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "avl"},
                .executor =
                    [](StepContext& ctx) {
                      const int key = ctx.value<int>(0);
                      auto& cell = ctx.object<AvlCell>(1);
                      cell.tree.insert(ctx.trace(), key);
                      cell.reference.insert(key);
                    },
                .bound_functions = {"AvlTree::insert"}});

  h->add_class({.id = "delete",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "avl"},
                .executor =
                    [](StepContext& ctx) {
                      const int key = ctx.value<int>(0);
                      auto& cell = ctx.object<AvlCell>(1);
                      cell.tree.remove(ctx.trace(), key);
                      cell.reference.erase(key);
                    },
                .bound_functions = {"AvlTree::remove"}});

  h->add_class({.id = "display",
                .kind = ActionKind::sut_call,
                .consumes = {"avl"},
                .executor =
                    [](StepContext& ctx) {
                      auto& cell = ctx.object<AvlCell>(0);
                      if (cell.tree.display(ctx.trace()) != render_reference(cell.reference)) {
                        ctx.fail("display", "mismatch");
                      }
                    },
                .bound_functions = {"AvlTree::display"}});

  h->add_property({"check_balanced", [avl_pool](const PoolView& pools, TraceContext& tc) {
                     std::optional<std::string> failure;
                     pools.for_each_object<AvlCell>(avl_pool, [&](const AvlCell& cell) {
                       if (!failure && !cell.tree.check_balanced(tc)) failure = "assertion";
                     });
                     return failure;
                   }});

  h->add_property({"inorder", [avl_pool](const PoolView& pools, TraceContext&) {
                     std::optional<std::string> failure;
                     pools.for_each_object<AvlCell>(avl_pool, [&](const AvlCell& cell) {
                       if (failure) return;
                       const auto keys = cell.tree.keys();
                       if (!std::equal(keys.begin(), keys.end(), cell.reference.begin(),
                                       cell.reference.end())) {
                         failure = "mismatch";
                       }
                     });
                     return failure;
                   }});
  return h;
}

}  // namespace locbias::bench
