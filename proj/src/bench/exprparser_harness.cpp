#include <limits>
#include <memory>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/bench/expr.hpp"

namespace locbias::bench {

namespace {

using Tokens = std::vector<Token>;

constexpr std::size_t kMaxTokens = 48;

constexpr std::int64_t kNumbers[] = {
    0, 1, 2, 3, 7, 10, 255, std::int64_t{1} << 31, std::numeric_limits<std::int64_t>::max(),
};
constexpr char kSymbols[] = {'+', '-', '*', '/', '(', ')'};
constexpr char kBinops[] = {'+', '-', '*', '/'};

Token symbol(char c) {
  if (c == '(') return {Token::Kind::lparen, 0, 0};
  if (c == ')') return {Token::Kind::rparen, 0, 0};
  return {Token::Kind::op, 0, c};
}

bool fits(std::size_t n) { return n <= kMaxTokens; }

}  // namespace

std::shared_ptr<const Harness> exprparser_harness(const Settings&) {
  auto h = std::make_shared<Harness>("exprparser");
  register_functions(*h, ExprParser::functions());
  h->set_probe_capacity(ExprParser::branch_probes(), ExprParser::stmt_probes());
  h->add_pool("expr", 4);

  h->add_class({.id = "num_tok",
                .kind = ActionKind::value_init,
                .produces = "expr",
                .domain_size = std::size(kNumbers),
                .executor =
                    [](StepContext& ctx) {
                      ctx.produce(Tokens{{Token::Kind::number, kNumbers[ctx.choice()], 0}});
                    }});

  h->add_class({.id = "op_tok",
                .kind = ActionKind::value_init,
                .produces = "expr",
                .domain_size = std::size(kSymbols),
                .executor = [](StepContext& ctx) { ctx.produce(Tokens{symbol(kSymbols[ctx.choice()])}); }});

  h->add_class({.id = "concat",
                .kind = ActionKind::value_compose,
                .consumes = {"expr", "expr"},
                .produces = "expr",
                .executor =
                    [](StepContext& ctx) {
                      Tokens out = ctx.value<Tokens>(0);
                      const auto& tail = ctx.value<Tokens>(1);
                      out.insert(out.end(), tail.begin(), tail.end());
                      ctx.produce(std::move(out));
                    },
                .guard =
                    [](const Args& args) {
                      return fits(args.value<Tokens>(0).size() + args.value<Tokens>(1).size());
                    }});

  h->add_class({.id = "paren",
                .kind = ActionKind::value_compose,
                .consumes = {"expr"},
                .produces = "expr",
                .executor =
                    [](StepContext& ctx) {
                      Tokens out{symbol('(')};
                      const auto& inner = ctx.value<Tokens>(0);
                      out.insert(out.end(), inner.begin(), inner.end());
                      out.push_back(symbol(')'));
                      ctx.produce(std::move(out));
                    },
                .guard = [](const Args& args) { return fits(args.value<Tokens>(0).size() + 2); }});

  h->add_class({.id = "binop",
                .kind = ActionKind::value_compose,
                .consumes = {"expr", "expr"},
                .produces = "expr",
                .domain_size = std::size(kBinops),
                .executor =
                    [](StepContext& ctx) {
                      Tokens out = ctx.value<Tokens>(0);
                      out.push_back(symbol(kBinops[ctx.choice()]));
                      const auto& rhs = ctx.value<Tokens>(1);
                      out.insert(out.end(), rhs.begin(), rhs.end());
                      ctx.produce(std::move(out));
                    },
                .guard =
                    [](const Args& args) {
                      return fits(args.value<Tokens>(0).size() + args.value<Tokens>(1).size() + 1);
                    }});

  h->add_class({.id = "neg",
                .kind = ActionKind::value_compose,
                .consumes = {"expr"},
                .produces = "expr",
                .executor =
                    [](StepContext& ctx) {
                      Tokens out{symbol('-')};
                      const auto& inner = ctx.value<Tokens>(0);
                      out.insert(out.end(), inner.begin(), inner.end());
                      ctx.produce(std::move(out));
                    },
                .guard = [](const Args& args) { return fits(args.value<Tokens>(0).size() + 1); }});

  h->add_class({.id = "parse_eval",
                .kind = ActionKind::sut_call,
                .consumes = {"expr"},
                .executor =
                    [](StepContext& ctx) {
                      const auto& tokens = ctx.value<Tokens>(0);
                      const EvalResult got = ExprParser::parse_eval(ctx.trace(), render_tokens(tokens));
                      if (got != reference_eval(tokens)) ctx.fail("eval", "mismatch");
                    },
                .bound_functions = {"ExprParser::parse_eval"}});
  return h;
}

}  // namespace locbias::bench
