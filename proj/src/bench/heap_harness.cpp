#include <memory>
#include <set>

#include "locbias/bench/bench.hpp"
#include "locbias/bench/heap.hpp"

namespace locbias::bench {

namespace {

struct HeapCell {
  HeapCell(TraceContext& tc, bool fault) : heap(tc, fault) {}
  Heap heap;
  std::multiset<int> reference;
};

bool non_empty(const Args& args) { return !args.object<HeapCell>(0).heap.empty(); }

}  // namespace

std::shared_ptr<const Harness> heap_harness(const Settings& settings) {
  const bool fault = fault_enabled(settings, "heap", "siftdown");
  auto h = std::make_shared<Harness>("heap");
  register_functions(*h, Heap::functions());
  h->set_probe_capacity(Heap::branch_probes(), Heap::stmt_probes());
  const PoolIndex heap_pool = h->add_pool("heap", 2);
  h->add_pool("int", 4);

  h->add_class({.id = "int_init",
                .kind = ActionKind::value_init,
                .produces = "int",
                .domain_size = 20,
                .executor = [](StepContext& ctx) { ctx.produce(static_cast<int>(ctx.choice()) + 1); }});

  h->add_class({.id = "heap_new",
                .kind = ActionKind::sut_call,
                .produces = "heap",
                .executor =
                    [fault](StepContext& ctx) {
                      ctx.produce_object(std::make_shared<HeapCell>(ctx.trace(), fault));
                    },
                .bound_functions = {"Heap::Heap"}});

  h->add_class({.id = "push",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "heap"},
                .executor =
                    [](StepContext& ctx) {
                      const int value = ctx.value<int>(0);
                      auto& cell = ctx.object<HeapCell>(1);
                      cell.heap.push(ctx.trace(), value);
                      cell.reference.insert(value);
                    },
                .bound_functions = {"Heap::push"}});

  h->add_class({.id = "pop",
                .kind = ActionKind::sut_call,
                .consumes = {"heap"},
                .executor =
                    [](StepContext& ctx) {
                      auto& cell = ctx.object<HeapCell>(0);
                      const int got = cell.heap.pop(ctx.trace());
                      const int expected = *cell.reference.begin();
                      cell.reference.erase(cell.reference.begin());
                      if (got != expected) ctx.fail("minimum", "pop");
                    },
                .guard = non_empty,
                .bound_functions = {"Heap::pop"}});

  h->add_class({.id = "peek",
                .kind = ActionKind::sut_call,
                .consumes = {"heap"},
                .executor =
                    [](StepContext& ctx) {
                      auto& cell = ctx.object<HeapCell>(0);
                      if (cell.heap.peek(ctx.trace()) != *cell.reference.begin()) {
                        ctx.fail("minimum", "peek");
                      }
                    },
                .guard = non_empty,
                .bound_functions = {"Heap::peek"}});

  h->add_property({"size", [heap_pool](const PoolView& pools, TraceContext&) {
                     std::optional<std::string> failure;
                     pools.for_each_object<HeapCell>(heap_pool, [&](const HeapCell& cell) {
                       if (cell.heap.size() != cell.reference.size()) failure = "mismatch";
                     });
                     return failure;
                   }});
  return h;
}

}  // namespace locbias::bench
