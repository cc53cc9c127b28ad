#include <cstdint>
#include <limits>
#include <memory>

#include "locbias/bench/bench.hpp"
#include "locbias/bench/codec.hpp"

namespace locbias::bench {

namespace {

// Composed values stay below these bounds.
constexpr std::size_t kMaxNodes = 32;
constexpr std::size_t kMaxDepth = 6;

constexpr std::int64_t kInts[] = {
    0, 1, -1, 42, -1000, std::int64_t{1} << 31, std::numeric_limits<std::int64_t>::max(),
    std::numeric_limits<std::int64_t>::min(),
};

const char* const kStrings[] = {
    "", "a", "key", "quote\"d", "back\\slash", "line\nbreak\ttab", "\x01\x1f", "h\xc3\xa9llo",
    "\xe2\x82\xac", "\xf0\x9d\x84\x9e",
};

const char* const kKeys[] = {"a", "b", "\xd0\xba\xd0\xbb\xd1\x8e\xd1\x87", "a\"b"};

EncodeOptions encode_flags(std::uint32_t bits) {
  return {.sort_keys = (bits & 1) != 0, .ensure_ascii = (bits & 2) != 0, .indent = (bits & 4) != 0};
}

DecodeOptions decode_flags(std::uint32_t bits) {
  return {.strict = (bits & 1) == 0, .allow_trailing_comma = (bits & 2) != 0};
}

bool fits(std::size_t nodes, std::size_t depth) { return nodes <= kMaxNodes && depth <= kMaxDepth; }

}  // namespace

std::shared_ptr<const Harness> codec_harness(const Settings&) {
  auto h = std::make_shared<Harness>("codec");
  register_functions(*h, Codec::functions());
  h->set_probe_capacity(Codec::branch_probes(), Codec::stmt_probes());
  const PoolIndex val_pool = h->add_pool("val", 4);
  h->add_pool("key", 2);
  h->add_pool("text", 2);

  auto init = [&](std::string id, std::uint32_t domain, std::function<JsonValue(std::uint32_t)> make) {
    h->add_class({.id = std::move(id),
                  .kind = ActionKind::value_init,
                  .produces = "val",
                  .domain_size = domain,
                  .executor = [make](StepContext& ctx) { ctx.produce(make(ctx.choice())); }});
  };
  init("int_init", std::size(kInts), [](std::uint32_t i) { return JsonValue::make_int(kInts[i]); });
  init("str_init", std::size(kStrings),
       [](std::uint32_t i) { return JsonValue::make_string(kStrings[i]); });
  init("lit_init", 3, [](std::uint32_t i) {
    return i == 0 ? JsonValue::make_null() : JsonValue::make_bool(i == 1);
  });
  init("list_new", 1, [](std::uint32_t) { return JsonValue::make_list(); });
  init("map_new", 1, [](std::uint32_t) { return JsonValue::make_map(); });

  h->add_class({.id = "key_init",
                .kind = ActionKind::value_init,
                .produces = "key",
                .domain_size = std::size(kKeys),
                .executor = [](StepContext& ctx) { ctx.produce(std::string(kKeys[ctx.choice()])); }});

  h->add_class({.id = "list_append",
                .kind = ActionKind::value_compose,
                .consumes = {"val", "val"},
                .produces = "val",
                .executor =
                    [](StepContext& ctx) {
                      JsonValue list = ctx.value<JsonValue>(0);
                      list.items.push_back(ctx.value<JsonValue>(1));
                      ctx.produce(std::move(list));
                    },
                .guard =
                    [](const Args& args) {
                      const auto& list = args.value<JsonValue>(0);
                      const auto& item = args.value<JsonValue>(1);
                      return list.kind == JsonValue::Kind::list &&
                             fits(list.nodes() + item.nodes(), std::max(list.depth(), item.depth() + 1));
                    }});

  h->add_class({.id = "list_wrap",
                .kind = ActionKind::value_compose,
                .consumes = {"val"},
                .produces = "val",
                .executor =
                    [](StepContext& ctx) {
                      ctx.produce(JsonValue::make_list({ctx.value<JsonValue>(0)}));
                    },
                .guard =
                    [](const Args& args) {
                      const auto& v = args.value<JsonValue>(0);
                      return fits(v.nodes() + 1, v.depth() + 1);
                    }});

  h->add_class({.id = "concat",
                .kind = ActionKind::value_compose,
                .consumes = {"val", "val"},
                .produces = "val",
                .executor =
                    [](StepContext& ctx) {
                      JsonValue out = ctx.value<JsonValue>(0);
                      const auto& tail = ctx.value<JsonValue>(1).items;
                      out.items.insert(out.items.end(), tail.begin(), tail.end());
                      ctx.produce(std::move(out));
                    },
                .guard =
                    [](const Args& args) {
                      const auto& a = args.value<JsonValue>(0);
                      const auto& b = args.value<JsonValue>(1);
                      return a.kind == JsonValue::Kind::list && b.kind == JsonValue::Kind::list &&
                             fits(a.nodes() + b.nodes(), std::max(a.depth(), b.depth()));
                    }});

  h->add_class({.id = "map_put",
                .kind = ActionKind::value_compose,
                .consumes = {"val", "key", "val"},
                .produces = "val",
                .executor =
                    [](StepContext& ctx) {
                      JsonValue map = ctx.value<JsonValue>(0);
                      map.put(ctx.value<std::string>(1), ctx.value<JsonValue>(2));
                      ctx.produce(std::move(map));
                    },
                .guard =
                    [](const Args& args) {
                      const auto& map = args.value<JsonValue>(0);
                      const auto& item = args.value<JsonValue>(2);
                      return map.kind == JsonValue::Kind::map &&
                             fits(map.nodes() + item.nodes(), std::max(map.depth(), item.depth() + 1));
                    }});

  h->add_class({.id = "encode",
                .kind = ActionKind::sut_call,
                .consumes = {"val"},
                .produces = "text",
                .domain_size = 8,
                .executor =
                    [](StepContext& ctx) {
                      ctx.produce(Codec::encode(ctx.trace(), ctx.value<JsonValue>(0),
                                                encode_flags(ctx.choice())));
                    },
                .bound_functions = {"Codec::encode"}});

  h->add_class({.id = "decode",
                .kind = ActionKind::sut_call,
                .consumes = {"text"},
                .produces = "val",
                .domain_size = 4,
                .executor =
                    [](StepContext& ctx) {
                      ctx.produce(Codec::decode(ctx.trace(), ctx.value<std::string>(0),
                                                decode_flags(ctx.choice())));
                    },
                .bound_functions = {"Codec::decode"}});

  h->add_property({"roundtrip", [val_pool](const PoolView& pools, TraceContext& tc) {
                     std::optional<std::string> failure;
                     pools.for_each_value<JsonValue>(val_pool, [&](const JsonValue& v) {
                       if (failure) return;
                       try {
                         if (!(Codec::decode(tc, Codec::encode(tc, v, {}), {}) == v)) {
                           failure = "mismatch";
                         }
                       } catch (const SutError& e) {
                         failure = e.category();
                       }
                     });
                     return failure;
                   }});
  return h;
}

}  // namespace locbias::bench
