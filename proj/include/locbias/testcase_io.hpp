#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locbias/harness.hpp"

namespace locbias {

class TestFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-oriented test file:
//
//   seed=<u64>
//   # key=value          (optional metadata: harness, settings, signature)
//   <class-id> <slot>... [<value-index>]
//
// The value index is present exactly for classes with a value domain.
struct RawStep {
  std::string class_id;
  std::vector<std::uint32_t> numbers;
};

struct TestFile {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;
  std::vector<RawStep> steps;
};

TestFile parse_test_file(std::string_view text);

// Resolves class ids and splits slot/value numbers against the harness.
// Throws UnknownActionClass or TestFormatError.
TestCase bind_test(const TestFile& file, const Harness& harness);

std::string format_test(const Harness& harness, const TestCase& test,
                        const std::map<std::string, std::string>& meta = {});

}  // namespace locbias
