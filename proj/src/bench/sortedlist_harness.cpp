#include <algorithm>
#include <memory>

#include "locbias/bench/bench.hpp"
#include "locbias/bench/sorted_list.hpp"

namespace locbias::bench {

namespace {

// A list under test and the plain sorted vector it must agree with.
struct ListCell {
  std::shared_ptr<SortedList> list;
  std::vector<int> reference;
};

using CellPtr = std::shared_ptr<ListCell>;

// Slice reads pick start in [0, 8) and length in [0, 8).
constexpr std::uint32_t kSliceSpan = 8;
constexpr std::uint32_t kIndexDomain = 8;

bool non_empty(const Args& args) { return args.object<ListCell>(0).list->size() > 0; }

}  // namespace

std::shared_ptr<const Harness> sortedlist_harness(const Settings& settings) {
  const SortedList::Faults faults{fault_enabled(settings, "sortedlist", "slice"),
                                  fault_enabled(settings, "sortedlist", "union")};
  auto h = std::make_shared<Harness>("sortedlist");
  register_functions(*h, SortedList::functions());
  h->set_probe_capacity(SortedList::branch_probes(), SortedList::stmt_probes());
  const PoolIndex list_pool = h->add_pool("list", 3);
  h->add_pool("int", 4);

  h->add_class({.id = "int_init",
                .kind = ActionKind::value_init,
                .produces = "int",
                .domain_size = 20,
                .executor = [](StepContext& ctx) { ctx.produce(static_cast<int>(ctx.choice()) + 1); }});

  h->add_class({.id = "list_new",
                .kind = ActionKind::sut_call,
                .produces = "list",
                .executor =
                    [faults](StepContext& ctx) {
                      auto cell = std::make_shared<ListCell>();
                      cell->list = std::make_shared<SortedList>(ctx.trace(), faults);
                      ctx.produce_object(std::move(cell));
                    },
                .bound_functions = {"SortedList::SortedList"}});

  h->add_class({.id = "add",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "list"},
                .executor =
                    [](StepContext& ctx) {
                      const int value = ctx.value<int>(0);
                      auto& cell = ctx.object<ListCell>(1);
                      cell.list->add(ctx.trace(), value);
                      auto& ref = cell.reference;
                      ref.insert(std::upper_bound(ref.begin(), ref.end(), value), value);
                    },
                .bound_functions = {"SortedList::add"}});

  h->add_class({.id = "remove",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "list"},
                .executor =
                    [](StepContext& ctx) {
                      const int value = ctx.value<int>(0);
                      auto& cell = ctx.object<ListCell>(1);
                      const bool removed = cell.list->remove(ctx.trace(), value);
                      auto& ref = cell.reference;
                      const auto it = std::lower_bound(ref.begin(), ref.end(), value);
                      const bool present = it != ref.end() && *it == value;
                      if (present) ref.erase(it);
                      if (removed != present) ctx.fail("remove", "mismatch");
                    },
                .bound_functions = {"SortedList::remove"}});

  h->add_class({.id = "index",
                .kind = ActionKind::sut_call,
                .consumes = {"list"},
                .domain_size = kIndexDomain,
                .executor =
                    [](StepContext& ctx) {
                      auto& cell = ctx.object<ListCell>(0);
                      const std::size_t i = ctx.choice() % cell.reference.size();
                      if (cell.list->at(ctx.trace(), i) != cell.reference[i]) {
                        ctx.fail("index", "mismatch");
                      }
                    },
                .guard = non_empty,
                .bound_functions = {"SortedList::at"}});

  h->add_class({.id = "slice",
                .kind = ActionKind::sut_call,
                .consumes = {"list"},
                .domain_size = kSliceSpan * kSliceSpan,
                .executor =
                    [](StepContext& ctx) {
                      auto& cell = ctx.object<ListCell>(0);
                      const std::size_t start = ctx.choice() / kSliceSpan;
                      const std::size_t stop = start + ctx.choice() % kSliceSpan;
                      const auto got = cell.list->slice(ctx.trace(), start, stop);
                      const auto& ref = cell.reference;
                      const std::size_t lo = std::min(start, ref.size());
                      const std::size_t hi = std::max(lo, std::min(stop, ref.size()));
                      if (!std::equal(got.begin(), got.end(), ref.begin() + static_cast<std::ptrdiff_t>(lo),
                                      ref.begin() + static_cast<std::ptrdiff_t>(hi))) {
                        ctx.fail("slice", "mismatch");
                      }
                    },
                .bound_functions = {"SortedList::slice"}});

  h->add_class({.id = "count",
                .kind = ActionKind::sut_call,
                .consumes = {"int", "list"},
                .executor =
                    [](StepContext& ctx) {
                      const int value = ctx.value<int>(0);
                      auto& cell = ctx.object<ListCell>(1);
                      const auto [lo, hi] =
                          std::equal_range(cell.reference.begin(), cell.reference.end(), value);
                      if (cell.list->count(ctx.trace(), value) != static_cast<std::size_t>(hi - lo)) {
                        ctx.fail("count", "mismatch");
                      }
                    },
                .bound_functions = {"SortedList::count"}});

  h->add_class({.id = "copy",
                .kind = ActionKind::sut_call,
                .consumes = {"list"},
                .produces = "list",
                .executor =
                    [](StepContext& ctx) {
                      const auto& source = ctx.object<ListCell>(0);
                      auto cell = std::make_shared<ListCell>();
                      cell->list = source.list->copy(ctx.trace());
                      cell->reference = source.reference;
                      ctx.produce_object(std::move(cell));
                    },
                .bound_functions = {"SortedList::copy"}});

  h->add_class({.id = "union",
                .kind = ActionKind::sut_call,
                .consumes = {"list", "list"},
                .produces = "list",
                .executor =
                    [](StepContext& ctx) {
                      const auto& a = ctx.object<ListCell>(0);
                      const auto& b = ctx.object<ListCell>(1);
                      auto cell = std::make_shared<ListCell>();
                      cell->list = a.list->merge_union(ctx.trace(), *b.list);
                      std::merge(a.reference.begin(), a.reference.end(), b.reference.begin(),
                                 b.reference.end(), std::back_inserter(cell->reference));
                      ctx.produce_object(std::move(cell));
                    },
                .bound_functions = {"SortedList::merge_union"}});

  h->add_property({"contents", [list_pool](const PoolView& pools, TraceContext&) {
                     std::optional<std::string> failure;
                     pools.for_each_object<ListCell>(list_pool, [&](const ListCell& cell) {
                       if (!failure && cell.list->to_vector() != cell.reference) failure = "mismatch";
                     });
                     return failure;
                   }});
  return h;
}

}  // namespace locbias::bench
