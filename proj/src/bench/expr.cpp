#include "locbias/bench/expr.hpp"

#include <limits>

namespace locbias::bench {

namespace {

enum Decision : std::uint32_t {
  kEvalEmpty,
  kEvalSingle,
  kEvalLexFailed,
  kEvalLeftover,
  kEvalDivZero,
  kLexSpace,
  kLexDigit,
  kLexOverflow,
  kLexOperator,
  kLexParen,
  kExprLoop,
  kExprPrecedence,
  kUnaryMinus,
  kPrimaryEnd,
  kPrimaryNumber,
  kPrimaryParen,
  kPrimaryClose,
  kApplyAdd,
  kApplySub,
  kApplyMul,
  kApplyDivZero,
  kApplyDivOverflow,
  kPrecedenceOp,
  kPrecedenceMul,
  kDecisionCount
};

enum Stmt : std::uint32_t {
  kSEval,
  kSEvalTrivial,
  kSEvalParse,
  kSLex,
  kSLexNumber,
  kSLexSymbol,
  kSExpr,
  kSExprFold,
  kSUnary,
  kSUnaryNegate,
  kSPrimary,
  kSPrimaryGroup,
  kSApply,
  kSApplyDiv,
  kSPrecedence,
  kStmtCount
};

struct SyntaxError {};

constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

constexpr FunctionLoc kFunctions[] = {
    {"ExprParser::parse_eval", 29},
    {"ExprParser::lex", 36},
    {"ExprParser::parse_expr", 15},
    {"ExprParser::parse_unary", 10},
    {"ExprParser::parse_primary", 20},
    {"ExprParser::apply", 14},
    {"ExprParser::precedence", 6},
};
static_assert(std::size(kFunctions) == ExprParser::kFnCount);

}  // namespace

std::string render_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    switch (t.kind) {
      case Token::Kind::number: out += std::to_string(t.number); break;
      case Token::Kind::op: out += t.op; break;
      case Token::Kind::lparen: out += '('; break;
      case Token::Kind::rparen: out += ')'; break;
    }
  }
  return out;
}

std::string to_string(const EvalResult& result) {
  switch (result.status) {
    case EvalResult::Status::ok: return std::to_string(result.value);
    case EvalResult::Status::syntax_error: return "syntax-error";
    case EvalResult::Status::division_by_zero: return "division-by-zero";
  }
  return "?";
}

std::span<const FunctionLoc> ExprParser::functions() { return kFunctions; }
std::size_t ExprParser::branch_probes() { return 2 * kDecisionCount; }
std::size_t ExprParser::stmt_probes() { return kStmtCount; }

// @fn ExprParser::parse_eval
EvalResult ExprParser::parse_eval(TraceContext& tc, std::string_view text) {
  tc.enter(kParseEval);
  tc.stmt(kSEval);
  State s{tc, {}, 0, false};
  if (tc.branch(kEvalLexFailed, !lex(tc, text, s.tokens))) {
    return {EvalResult::Status::syntax_error, 0};
  }
  // Trivial inputs need no parser.
  if (tc.branch(kEvalEmpty, s.tokens.empty())) {
    tc.stmt(kSEvalTrivial);
    return {EvalResult::Status::syntax_error, 0};
  }
  if (tc.branch(kEvalSingle, s.tokens.size() == 1 && s.tokens[0].kind == Token::Kind::number)) {
    tc.stmt(kSEvalTrivial);
    return {EvalResult::Status::ok, s.tokens[0].number};
  }
  tc.stmt(kSEvalParse);
  std::int64_t value = 0;
  try {
    value = parse_expr(s, 0);
    if (tc.branch(kEvalLeftover, s.pos != s.tokens.size())) throw SyntaxError{};
  } catch (const SyntaxError&) {
    return {EvalResult::Status::syntax_error, 0};
  }
  if (tc.branch(kEvalDivZero, s.divided_by_zero)) {
    return {EvalResult::Status::division_by_zero, 0};
  }
  return {EvalResult::Status::ok, value};
}

// @fn ExprParser::lex
bool ExprParser::lex(TraceContext& tc, std::string_view text, std::vector<Token>& out) {
  tc.enter(kLex);
  tc.stmt(kSLex);
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (tc.branch(kLexSpace, c == ' ')) {
      ++i;
      continue;
    }
    if (tc.branch(kLexDigit, c >= '0' && c <= '9')) {
      tc.stmt(kSLexNumber);
      std::int64_t value = 0;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        const int digit = text[i] - '0';
        if (tc.branch(kLexOverflow, value > (std::numeric_limits<std::int64_t>::max() - digit) / 10)) {
          return false;
        }
        value = value * 10 + digit;
        ++i;
      }
      out.push_back({Token::Kind::number, value, 0});
      continue;
    }
    tc.stmt(kSLexSymbol);
    if (tc.branch(kLexOperator, c == '+' || c == '-' || c == '*' || c == '/')) {
      out.push_back({Token::Kind::op, 0, c});
    } else if (tc.branch(kLexParen, c == '(' || c == ')')) {
      out.push_back({c == '(' ? Token::Kind::lparen : Token::Kind::rparen, 0, 0});
    } else {
      return false;
    }
    ++i;
  }
  return true;
}

// @fn ExprParser::parse_expr
std::int64_t ExprParser::parse_expr(State& s, int min_prec) {
  s.tc.enter(kParseExpr);
  s.tc.stmt(kSExpr);
  std::int64_t lhs = parse_unary(s);
  while (s.tc.branch(kExprLoop, s.pos < s.tokens.size())) {
    const Token& t = s.tokens[s.pos];
    const int prec = precedence(s.tc, t);
    if (s.tc.branch(kExprPrecedence, prec < min_prec || prec == 0)) break;
    s.tc.stmt(kSExprFold);
    ++s.pos;
    const std::int64_t rhs = parse_expr(s, prec + 1);
    lhs = apply(s, t.op, lhs, rhs);
  }
  return lhs;
}

// @fn ExprParser::parse_unary
std::int64_t ExprParser::parse_unary(State& s) {
  s.tc.enter(kParseUnary);
  s.tc.stmt(kSUnary);
  const bool minus = s.pos < s.tokens.size() && s.tokens[s.pos].kind == Token::Kind::op &&
                     s.tokens[s.pos].op == '-';
  if (!s.tc.branch(kUnaryMinus, minus)) return parse_primary(s);
  s.tc.stmt(kSUnaryNegate);
  ++s.pos;
  return wrap_sub(0, parse_unary(s));
}

// @fn ExprParser::parse_primary
std::int64_t ExprParser::parse_primary(State& s) {
  s.tc.enter(kParsePrimary);
  s.tc.stmt(kSPrimary);
  if (s.tc.branch(kPrimaryEnd, s.pos >= s.tokens.size())) throw SyntaxError{};
  const Token& t = s.tokens[s.pos];
  if (s.tc.branch(kPrimaryNumber, t.kind == Token::Kind::number)) {
    ++s.pos;
    return t.number;
  }
  if (!s.tc.branch(kPrimaryParen, t.kind == Token::Kind::lparen)) throw SyntaxError{};
  s.tc.stmt(kSPrimaryGroup);
  ++s.pos;
  const std::int64_t value = parse_expr(s, 0);
  if (!s.tc.branch(kPrimaryClose, s.pos < s.tokens.size() &&
                                      s.tokens[s.pos].kind == Token::Kind::rparen)) {
    throw SyntaxError{};
  }
  ++s.pos;
  return value;
}

// @fn ExprParser::apply
std::int64_t ExprParser::apply(State& s, char op, std::int64_t lhs, std::int64_t rhs) {
  s.tc.enter(kApply);
  s.tc.stmt(kSApply);
  if (s.tc.branch(kApplyAdd, op == '+')) return wrap_add(lhs, rhs);
  if (s.tc.branch(kApplySub, op == '-')) return wrap_sub(lhs, rhs);
  if (s.tc.branch(kApplyMul, op == '*')) return wrap_mul(lhs, rhs);
  s.tc.stmt(kSApplyDiv);
  if (s.tc.branch(kApplyDivZero, rhs == 0)) {
    s.divided_by_zero = true;
    return 0;
  }
  if (s.tc.branch(kApplyDivOverflow, lhs == kMin && rhs == -1)) return kMin;
  return lhs / rhs;
}

// @fn ExprParser::precedence
int ExprParser::precedence(TraceContext& tc, const Token& token) {
  tc.enter(kPrecedence);
  tc.stmt(kSPrecedence);
  if (!tc.branch(kPrecedenceOp, token.kind == Token::Kind::op)) return 0;
  return tc.branch(kPrecedenceMul, token.op == '*' || token.op == '/') ? 2 : 1;
}

namespace {

// expr := term (('+' | '-') term)*
// term := unary (('*' | '/') unary)*
// unary := '-' unary | primary
// primary := number | '(' expr ')'
class Reference {
 public:
  explicit Reference(std::span<const Token> tokens) : tokens_(tokens) {}

  EvalResult run() {
    try {
      const std::int64_t v = expr();
      if (pos_ != tokens_.size()) throw SyntaxError{};
      if (div_zero_) return {EvalResult::Status::division_by_zero, 0};
      return {EvalResult::Status::ok, v};
    } catch (const SyntaxError&) {
      return {EvalResult::Status::syntax_error, 0};
    }
  }

 private:
  bool at_op(char op) const {
    return pos_ < tokens_.size() && tokens_[pos_].kind == Token::Kind::op && tokens_[pos_].op == op;
  }

  std::int64_t expr() {
    std::int64_t v = term();
    while (at_op('+') || at_op('-')) {
      const char op = tokens_[pos_++].op;
      const std::int64_t rhs = term();
      v = op == '+' ? wrap_add(v, rhs) : wrap_sub(v, rhs);
    }
    return v;
  }

  std::int64_t term() {
    std::int64_t v = unary();
    while (at_op('*') || at_op('/')) {
      const char op = tokens_[pos_++].op;
      const std::int64_t rhs = unary();
      if (op == '*') {
        v = wrap_mul(v, rhs);
      } else if (rhs == 0) {
        div_zero_ = true;
        v = 0;
      } else {
        v = (v == kMin && rhs == -1) ? kMin : v / rhs;
      }
    }
    return v;
  }

  std::int64_t unary() {
    if (at_op('-')) {
      ++pos_;
      return wrap_sub(0, unary());
    }
    return primary();
  }

  std::int64_t primary() {
    if (pos_ >= tokens_.size()) throw SyntaxError{};
    const Token& t = tokens_[pos_];
    if (t.kind == Token::Kind::number) {
      ++pos_;
      return t.number;
    }
    if (t.kind != Token::Kind::lparen) throw SyntaxError{};
    ++pos_;
    const std::int64_t v = expr();
    if (pos_ >= tokens_.size() || tokens_[pos_].kind != Token::Kind::rparen) throw SyntaxError{};
    ++pos_;
    return v;
  }

  std::span<const Token> tokens_;
  std::size_t pos_ = 0;
  bool div_zero_ = false;
};

}  // namespace

EvalResult reference_eval(std::span<const Token> tokens) { return Reference(tokens).run(); }

}  // namespace locbias::bench
