#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/coverage.hpp"

namespace locbias::bench {

struct Token {
  enum class Kind { number, op, lparen, rparen };
  Kind kind = Kind::number;
  std::int64_t number = 0;
  char op = 0;  // one of + - * /

  friend bool operator==(const Token&, const Token&) = default;
};

// Tokens joined by single spaces.
std::string render_tokens(std::span<const Token> tokens);

// Outcome of evaluating an expression. Arithmetic wraps on int64 overflow;
// INT64_MIN / -1 is INT64_MIN. A syntax error wins over division by zero.
struct EvalResult {
  enum class Status { ok, syntax_error, division_by_zero };
  Status status = Status::ok;
  std::int64_t value = 0;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

std::string to_string(const EvalResult& result);

// Instrumented lexer plus precedence-climbing parser and evaluator.
class ExprParser {
 public:
  enum Fn : FunctionId {
    kParseEval,
    kLex,
    kParseExpr,
    kParseUnary,
    kParsePrimary,
    kApply,
    kPrecedence,
    kFnCount
  };

  static std::span<const FunctionLoc> functions();
  static std::size_t branch_probes();
  static std::size_t stmt_probes();

  static EvalResult parse_eval(TraceContext& tc, std::string_view text);

 private:
  struct State {
    TraceContext& tc;
    std::vector<Token> tokens;
    std::size_t pos = 0;
    bool divided_by_zero = false;
  };

  static bool lex(TraceContext& tc, std::string_view text, std::vector<Token>& out);
  static std::int64_t parse_expr(State& s, int min_prec);
  static std::int64_t parse_unary(State& s);
  static std::int64_t parse_primary(State& s);
  static std::int64_t apply(State& s, char op, std::int64_t lhs, std::int64_t rhs);
  static int precedence(TraceContext& tc, const Token& token);
};

// Plain recursive-descent evaluator over tokens, used as the oracle.
EvalResult reference_eval(std::span<const Token> tokens);

}  // namespace locbias::bench
