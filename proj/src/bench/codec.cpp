#include "locbias/bench/codec.hpp"

#include <algorithm>
#include <limits>

#include "locbias/harness.hpp"

namespace locbias::bench {

namespace {

enum Decision : std::uint32_t {
  kValueKind,
  kStringSimple,
  kStringControl,
  kStringNonAscii,
  kStringAstral,
  kIntNegative,
  kListEmpty,
  kListSeparator,
  kMapEmpty,
  kMapSorted,
  kMapSeparator,
  kNewlineIndent,
  kDecodeTrailing,
  kValueString,
  kValueList,
  kValueMap,
  kValueNumber,
  kStringEnd,
  kStringEscape,
  kStringRawControl,
  kEscapeUnicode,
  kEscapeSurrogate,
  kEscapeKnown,
  kNumberNegative,
  kNumberLeadingZero,
  kNumberOverflow,
  kListClose,
  kListComma,
  kListTrailingComma,
  kMapClose,
  kMapComma,
  kMapTrailingComma,
  kMapDuplicate,
  kLiteralMatch,
  kSpaceSkip,
  kDecisionCount
};

enum Stmt : std::uint32_t {
  kSEncode,
  kSEncodeNull,
  kSEncodeBool,
  kSEncodeString,
  kSEncodeEscape,
  kSEncodeUnicode,
  kSEncodeInt,
  kSEncodeList,
  kSEncodeMap,
  kSEncodeMapSort,
  kSNewline,
  kSDecode,
  kSParseValue,
  kSParseString,
  kSParseEscape,
  kSParseSurrogate,
  kSParseNumber,
  kSParseList,
  kSParseMap,
  kSParseLiteral,
  kSSkipSpace,
  kSError,
  kStmtCount
};

constexpr FunctionLoc kFunctions[] = {
    {"Codec::encode", 7},
    {"Codec::encode_value", 27},
    {"Codec::encode_string", 43},
    {"Codec::encode_int", 6},
    {"Codec::encode_list", 18},
    {"Codec::encode_map", 26},
    {"Codec::newline", 7},
    {"Codec::decode", 10},
    {"Codec::parse_value", 11},
    {"Codec::parse_string", 20},
    {"Codec::parse_escape", 41},
    {"Codec::parse_number", 21},
    {"Codec::parse_list", 24},
    {"Codec::parse_map", 34},
    {"Codec::parse_literal", 17},
    {"Codec::skip_space", 7},
};
static_assert(std::size(kFunctions) == Codec::kFnCount);

[[noreturn]] void decode_error(TraceContext& tc) {
  tc.stmt(kSError);
  throw SutError("decode-error");
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

void append_u_escape(std::string& out, std::uint32_t unit) {
  static constexpr char kHex[] = "0123456789abcdef";
  out += "\\u";
  for (int shift = 12; shift >= 0; shift -= 4) out += kHex[(unit >> shift) & 0xF];
}

}  // namespace

JsonValue JsonValue::make_bool(bool b) {
  JsonValue v;
  v.kind = Kind::boolean;
  v.boolean = b;
  return v;
}

JsonValue JsonValue::make_int(std::int64_t i) {
  JsonValue v;
  v.kind = Kind::integer;
  v.integer = i;
  return v;
}

JsonValue JsonValue::make_string(std::string s) {
  JsonValue v;
  v.kind = Kind::string;
  v.string = std::move(s);
  return v;
}

JsonValue JsonValue::make_list(std::vector<JsonValue> items) {
  JsonValue v;
  v.kind = Kind::list;
  v.items = std::move(items);
  return v;
}

JsonValue JsonValue::make_map() {
  JsonValue v;
  v.kind = Kind::map;
  return v;
}

void JsonValue::put(const std::string& key, JsonValue value) {
  for (auto& [k, v] : fields) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  fields.emplace_back(key, std::move(value));
}

std::size_t JsonValue::nodes() const {
  std::size_t n = 1;
  for (const auto& item : items) n += item.nodes();
  for (const auto& [k, v] : fields) n += v.nodes();
  return n;
}

std::size_t JsonValue::depth() const {
  std::size_t d = 0;
  for (const auto& item : items) d = std::max(d, item.depth());
  for (const auto& [k, v] : fields) d = std::max(d, v.depth());
  return (kind == Kind::list || kind == Kind::map) ? d + 1 : d;
}

bool operator==(const JsonValue& a, const JsonValue& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case JsonValue::Kind::null:
      return true;
    case JsonValue::Kind::boolean:
      return a.boolean == b.boolean;
    case JsonValue::Kind::integer:
      return a.integer == b.integer;
    case JsonValue::Kind::string:
      return a.string == b.string;
    case JsonValue::Kind::list:
      return a.items == b.items;
    case JsonValue::Kind::map: {
      if (a.fields.size() != b.fields.size()) return false;
      for (const auto& [k, v] : a.fields) {
        auto it = std::find_if(b.fields.begin(), b.fields.end(),
                               [&](const auto& f) { return f.first == k; });
        if (it == b.fields.end() || !(it->second == v)) return false;
      }
      return true;
    }
  }
  return false;
}

std::span<const FunctionLoc> Codec::functions() { return kFunctions; }
std::size_t Codec::branch_probes() { return 2 * kDecisionCount; }
std::size_t Codec::stmt_probes() { return kStmtCount; }

// @fn Codec::encode
std::string Codec::encode(TraceContext& tc, const JsonValue& value, const EncodeOptions& options) {
  tc.enter(kEncode);
  tc.stmt(kSEncode);
  Writer w{tc, options, {}, 0};
  encode_value(w, value);
  return std::move(w.out);
}

// @fn Codec::encode_value
void Codec::encode_value(Writer& w, const JsonValue& value) {
  w.tc.enter(kEncodeValue);
  using Kind = JsonValue::Kind;
  w.tc.branch(kValueKind, value.kind == Kind::list || value.kind == Kind::map);
  switch (value.kind) {
    case Kind::null:
      w.tc.stmt(kSEncodeNull);
      w.out += "null";
      break;
    case Kind::boolean:
      w.tc.stmt(kSEncodeBool);
      w.out += value.boolean ? "true" : "false";
      break;
    case Kind::integer:
      encode_int(w, value.integer);
      break;
    case Kind::string:
      encode_string(w, value.string);
      break;
    case Kind::list:
      encode_list(w, value);
      break;
    case Kind::map:
      encode_map(w, value);
      break;
  }
}

// @fn Codec::encode_string
void Codec::encode_string(Writer& w, std::string_view s) {
  w.tc.enter(kEncodeString);
  w.tc.stmt(kSEncodeString);
  w.out += '"';
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (w.tc.branch(kStringSimple, c >= 0x20 && c < 0x80 && c != '"' && c != '\\')) {
      w.out += static_cast<char>(c);
      continue;
    }
    if (w.tc.branch(kStringControl, c < 0x80)) {
      w.tc.stmt(kSEncodeEscape);
      switch (c) {
        case '"': w.out += "\\\""; break;
        case '\\': w.out += "\\\\"; break;
        case '\n': w.out += "\\n"; break;
        case '\t': w.out += "\\t"; break;
        case '\r': w.out += "\\r"; break;
        default: append_u_escape(w.out, c); break;
      }
      continue;
    }
    if (!w.tc.branch(kStringNonAscii, w.options.ensure_ascii)) {
      w.out += static_cast<char>(c);
      continue;
    }
    // Decode one UTF-8 sequence and emit it as \u escapes.
    w.tc.stmt(kSEncodeUnicode);
    const int extra = c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : 1;
    std::uint32_t cp = c & (0x3F >> extra);
    for (int k = 0; k < extra && i + 1 < s.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[++i]) & 0x3F);
    }
    if (w.tc.branch(kStringAstral, cp >= 0x10000)) {
      cp -= 0x10000;
      append_u_escape(w.out, 0xD800 + (cp >> 10));
      append_u_escape(w.out, 0xDC00 + (cp & 0x3FF));
    } else {
      append_u_escape(w.out, cp);
    }
  }
  w.out += '"';
}

// @fn Codec::encode_int
void Codec::encode_int(Writer& w, std::int64_t i) {
  w.tc.enter(kEncodeInt);
  w.tc.stmt(kSEncodeInt);
  w.tc.branch(kIntNegative, i < 0);
  w.out += std::to_string(i);
}

// @fn Codec::encode_list
void Codec::encode_list(Writer& w, const JsonValue& value) {
  w.tc.enter(kEncodeList);
  w.tc.stmt(kSEncodeList);
  if (w.tc.branch(kListEmpty, value.items.empty())) {
    w.out += "[]";
    return;
  }
  w.out += '[';
  ++w.level;
  for (std::size_t i = 0; i < value.items.size(); ++i) {
    if (w.tc.branch(kListSeparator, i > 0)) w.out += ',';
    newline(w);
    encode_value(w, value.items[i]);
  }
  --w.level;
  newline(w);
  w.out += ']';
}

// @fn Codec::encode_map
void Codec::encode_map(Writer& w, const JsonValue& value) {
  w.tc.enter(kEncodeMap);
  w.tc.stmt(kSEncodeMap);
  if (w.tc.branch(kMapEmpty, value.fields.empty())) {
    w.out += "{}";
    return;
  }
  std::vector<const std::pair<std::string, JsonValue>*> order;
  for (const auto& f : value.fields) order.push_back(&f);
  if (w.tc.branch(kMapSorted, w.options.sort_keys)) {
    w.tc.stmt(kSEncodeMapSort);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->first < b->first; });
  }
  w.out += '{';
  ++w.level;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (w.tc.branch(kMapSeparator, i > 0)) w.out += ',';
    newline(w);
    encode_string(w, order[i]->first);
    w.out += w.options.indent ? ": " : ":";
    encode_value(w, order[i]->second);
  }
  --w.level;
  newline(w);
  w.out += '}';
}

// @fn Codec::newline
void Codec::newline(Writer& w) {
  w.tc.enter(kNewline);
  if (!w.tc.branch(kNewlineIndent, w.options.indent)) return;
  w.tc.stmt(kSNewline);
  w.out += '\n';
  w.out.append(static_cast<std::size_t>(2 * w.level), ' ');
}

// @fn Codec::decode
JsonValue Codec::decode(TraceContext& tc, std::string_view text, const DecodeOptions& options) {
  tc.enter(kDecode);
  tc.stmt(kSDecode);
  Reader r{tc, options, text, 0};
  skip_space(r);
  JsonValue value = parse_value(r);
  skip_space(r);
  if (tc.branch(kDecodeTrailing, r.pos != text.size())) decode_error(tc);
  return value;
}

// @fn Codec::parse_value
JsonValue Codec::parse_value(Reader& r) {
  r.tc.enter(kParseValue);
  r.tc.stmt(kSParseValue);
  if (r.pos >= r.text.size()) decode_error(r.tc);
  const char c = r.text[r.pos];
  if (r.tc.branch(kValueString, c == '"')) return JsonValue::make_string(parse_string(r));
  if (r.tc.branch(kValueList, c == '[')) return parse_list(r);
  if (r.tc.branch(kValueMap, c == '{')) return parse_map(r);
  if (r.tc.branch(kValueNumber, c == '-' || (c >= '0' && c <= '9'))) return parse_number(r);
  return parse_literal(r);
}

// @fn Codec::parse_string
std::string Codec::parse_string(Reader& r) {
  r.tc.enter(kParseString);
  r.tc.stmt(kSParseString);
  std::string out;
  ++r.pos;  // opening quote
  while (true) {
    if (r.pos >= r.text.size()) decode_error(r.tc);
    const auto c = static_cast<unsigned char>(r.text[r.pos]);
    if (r.tc.branch(kStringEnd, c == '"')) break;
    if (r.tc.branch(kStringEscape, c == '\\')) {
      parse_escape(r, out);
      continue;
    }
    if (r.tc.branch(kStringRawControl, c < 0x20 && r.options.strict)) decode_error(r.tc);
    out += static_cast<char>(c);
    ++r.pos;
  }
  ++r.pos;
  return out;
}

// @fn Codec::parse_escape
void Codec::parse_escape(Reader& r, std::string& out) {
  r.tc.enter(kParseEscape);
  r.tc.stmt(kSParseEscape);
  auto hex4 = [&r](std::size_t at) -> std::uint32_t {
    if (at + 4 > r.text.size()) decode_error(r.tc);
    std::uint32_t unit = 0;
    for (std::size_t k = at; k < at + 4; ++k) {
      const char h = r.text[k];
      unit <<= 4;
      if (h >= '0' && h <= '9') unit |= static_cast<std::uint32_t>(h - '0');
      else if (h >= 'a' && h <= 'f') unit |= static_cast<std::uint32_t>(h - 'a' + 10);
      else if (h >= 'A' && h <= 'F') unit |= static_cast<std::uint32_t>(h - 'A' + 10);
      else decode_error(r.tc);
    }
    return unit;
  };
  if (r.pos + 1 >= r.text.size()) decode_error(r.tc);
  const char e = r.text[r.pos + 1];
  if (r.tc.branch(kEscapeUnicode, e == 'u')) {
    std::uint32_t cp = hex4(r.pos + 2);
    r.pos += 6;
    if (r.tc.branch(kEscapeSurrogate, cp >= 0xD800 && cp < 0xDC00)) {
      r.tc.stmt(kSParseSurrogate);
      if (r.pos + 1 >= r.text.size() || r.text[r.pos] != '\\' || r.text[r.pos + 1] != 'u') {
        decode_error(r.tc);
      }
      const std::uint32_t low = hex4(r.pos + 2);
      if (low < 0xDC00 || low >= 0xE000) decode_error(r.tc);
      cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
      r.pos += 6;
    }
    append_utf8(out, cp);
    return;
  }
  static constexpr std::string_view kFrom = "\"\\/bfnrt";
  static constexpr std::string_view kTo = "\"\\/\b\f\n\r\t";
  const auto k = kFrom.find(e);
  if (!r.tc.branch(kEscapeKnown, k != std::string_view::npos)) decode_error(r.tc);
  out += kTo[k];
  r.pos += 2;
}

// @fn Codec::parse_number
JsonValue Codec::parse_number(Reader& r) {
  r.tc.enter(kParseNumber);
  r.tc.stmt(kSParseNumber);
  const bool negative = r.tc.branch(kNumberNegative, r.text[r.pos] == '-');
  if (negative) ++r.pos;
  const std::size_t start = r.pos;
  // Accumulate negated so the most negative value fits.
  std::int64_t acc = 0;
  constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
  while (r.pos < r.text.size() && r.text[r.pos] >= '0' && r.text[r.pos] <= '9') {
    const int digit = r.text[r.pos] - '0';
    if (r.tc.branch(kNumberOverflow, acc < (kMin + digit) / 10)) decode_error(r.tc);
    acc = acc * 10 - digit;
    ++r.pos;
  }
  if (r.pos == start) decode_error(r.tc);
  if (r.tc.branch(kNumberLeadingZero, r.text[start] == '0' && r.pos - start > 1)) decode_error(r.tc);
  if (negative) return JsonValue::make_int(acc);
  if (acc == kMin) decode_error(r.tc);
  return JsonValue::make_int(-acc);
}

// @fn Codec::parse_list
JsonValue Codec::parse_list(Reader& r) {
  r.tc.enter(kParseList);
  r.tc.stmt(kSParseList);
  JsonValue list = JsonValue::make_list();
  ++r.pos;  // '['
  skip_space(r);
  if (r.tc.branch(kListClose, r.pos < r.text.size() && r.text[r.pos] == ']')) {
    ++r.pos;
    return list;
  }
  while (true) {
    list.items.push_back(parse_value(r));
    skip_space(r);
    if (r.pos >= r.text.size()) decode_error(r.tc);
    if (!r.tc.branch(kListComma, r.text[r.pos] == ',')) break;
    ++r.pos;
    skip_space(r);
    if (r.tc.branch(kListTrailingComma, r.options.allow_trailing_comma && r.pos < r.text.size() &&
                                            r.text[r.pos] == ']')) break;
  }
  if (r.text[r.pos] != ']') decode_error(r.tc);
  ++r.pos;
  return list;
}

// @fn Codec::parse_map
JsonValue Codec::parse_map(Reader& r) {
  r.tc.enter(kParseMap);
  r.tc.stmt(kSParseMap);
  JsonValue map = JsonValue::make_map();
  ++r.pos;  // '{'
  skip_space(r);
  if (r.tc.branch(kMapClose, r.pos < r.text.size() && r.text[r.pos] == '}')) {
    ++r.pos;
    return map;
  }
  while (true) {
    if (r.pos >= r.text.size() || r.text[r.pos] != '"') decode_error(r.tc);
    std::string key = parse_string(r);
    skip_space(r);
    if (r.pos >= r.text.size() || r.text[r.pos] != ':') decode_error(r.tc);
    ++r.pos;
    skip_space(r);
    JsonValue value = parse_value(r);
    const bool duplicate = std::any_of(map.fields.begin(), map.fields.end(),
                                       [&](const auto& f) { return f.first == key; });
    if (r.tc.branch(kMapDuplicate, duplicate && r.options.strict)) decode_error(r.tc);
    map.put(key, std::move(value));
    skip_space(r);
    if (r.pos >= r.text.size()) decode_error(r.tc);
    if (!r.tc.branch(kMapComma, r.text[r.pos] == ',')) break;
    ++r.pos;
    skip_space(r);
    if (r.tc.branch(kMapTrailingComma, r.options.allow_trailing_comma && r.pos < r.text.size() &&
                                           r.text[r.pos] == '}')) break;
  }
  if (r.text[r.pos] != '}') decode_error(r.tc);
  ++r.pos;
  return map;
}

// @fn Codec::parse_literal
JsonValue Codec::parse_literal(Reader& r) {
  r.tc.enter(kParseLiteral);
  r.tc.stmt(kSParseLiteral);
  const std::string_view rest = r.text.substr(r.pos);
  static const std::pair<std::string_view, JsonValue> kLiterals[] = {
      {"null", JsonValue::make_null()},
      {"true", JsonValue::make_bool(true)},
      {"false", JsonValue::make_bool(false)},
  };
  for (const auto& [word, value] : kLiterals) {
    if (r.tc.branch(kLiteralMatch, rest.starts_with(word))) {
      r.pos += word.size();
      return value;
    }
  }
  decode_error(r.tc);
}

// @fn Codec::skip_space
void Codec::skip_space(Reader& r) {
  r.tc.enter(kSkipSpace);
  r.tc.stmt(kSSkipSpace);
  while (r.tc.branch(kSpaceSkip, r.pos < r.text.size() && (r.text[r.pos] == ' ' || r.text[r.pos] == '\n'))) {
    ++r.pos;
  }
}

}  // namespace locbias::bench
