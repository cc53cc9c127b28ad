#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "locbias/bench/bench.hpp"
#include "locbias/coverage.hpp"

namespace locbias::bench {

// JSON-like value. Maps keep insertion order and unique keys; equality
// ignores map order.
struct JsonValue {
  enum class Kind { null, boolean, integer, string, list, map };

  Kind kind = Kind::null;
  bool boolean = false;
  std::int64_t integer = 0;
  std::string string;
  std::vector<JsonValue> items;
  std::vector<std::pair<std::string, JsonValue>> fields;

  static JsonValue make_null() { return {}; }
  static JsonValue make_bool(bool b);
  static JsonValue make_int(std::int64_t i);
  static JsonValue make_string(std::string s);
  static JsonValue make_list(std::vector<JsonValue> items = {});
  static JsonValue make_map();

  // Inserts or replaces a map entry.
  void put(const std::string& key, JsonValue value);

  std::size_t nodes() const;
  std::size_t depth() const;

  friend bool operator==(const JsonValue& a, const JsonValue& b);
};

struct EncodeOptions {
  bool sort_keys = false;
  bool ensure_ascii = false;  // escape non-ASCII as \uXXXX
  bool indent = false;        // one entry per line, two-space indent
};

struct DecodeOptions {
  bool strict = true;              // reject raw control characters in strings
  bool allow_trailing_comma = false;
};

// Instrumented encoder and decoder. Malformed input throws
// SutError("decode-error").
class Codec {
 public:
  enum Fn : FunctionId {
    kEncode,
    kEncodeValue,
    kEncodeString,
    kEncodeInt,
    kEncodeList,
    kEncodeMap,
    kNewline,
    kDecode,
    kParseValue,
    kParseString,
    kParseEscape,
    kParseNumber,
    kParseList,
    kParseMap,
    kParseLiteral,
    kSkipSpace,
    kFnCount
  };

  static std::span<const FunctionLoc> functions();
  static std::size_t branch_probes();
  static std::size_t stmt_probes();

  static std::string encode(TraceContext& tc, const JsonValue& value, const EncodeOptions& options);
  static JsonValue decode(TraceContext& tc, std::string_view text, const DecodeOptions& options);

 private:
  struct Writer {
    TraceContext& tc;
    const EncodeOptions& options;
    std::string out;
    int level = 0;
  };
  struct Reader {
    TraceContext& tc;
    const DecodeOptions& options;
    std::string_view text;
    std::size_t pos = 0;
  };

  static void encode_value(Writer& w, const JsonValue& value);
  static void encode_string(Writer& w, std::string_view s);
  static void encode_int(Writer& w, std::int64_t i);
  static void encode_list(Writer& w, const JsonValue& value);
  static void encode_map(Writer& w, const JsonValue& value);
  static void newline(Writer& w);

  static JsonValue parse_value(Reader& r);
  static std::string parse_string(Reader& r);
  static void parse_escape(Reader& r, std::string& out);
  static JsonValue parse_number(Reader& r);
  static JsonValue parse_list(Reader& r);
  static JsonValue parse_map(Reader& r);
  static JsonValue parse_literal(Reader& r);
  static void skip_space(Reader& r);
};

}  // namespace locbias::bench
