#include "locbias/testcase_io.hpp"

#include <charconv>
#include <sstream>

namespace locbias {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view token, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw TestFormatError("line " + std::to_string(line_no) + ": bad number '" +
                          std::string(token) + "'");
  }
  return value;
}

}  // namespace

TestFile parse_test_file(std::string_view text) {
  TestFile file;
  bool have_seed = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        file.meta[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (!have_seed) {
      if (!line.starts_with("seed=")) {
        throw TestFormatError("line " + std::to_string(line_no) + ": expected 'seed=<u64>' header");
      }
      file.seed = parse_number<std::uint64_t>(line.substr(5), line_no);
      have_seed = true;
      continue;
    }
    RawStep step;
    std::size_t i = 0;
    bool first = true;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) {
        const auto token = line.substr(i, j - i);
        if (first) {
          step.class_id = std::string(token);
          first = false;
        } else {
          step.numbers.push_back(parse_number<std::uint32_t>(token, line_no));
        }
      }
      i = j;
    }
    file.steps.push_back(std::move(step));
  }
  if (!have_seed) throw TestFormatError("missing 'seed=<u64>' header");
  return file;
}

TestCase bind_test(const TestFile& file, const Harness& harness) {
  TestCase test;
  test.seed = file.seed;
  for (const auto& raw : file.steps) {
    TestStep step;
    step.class_index = harness.class_index(raw.class_id);
    const ActionClass& cls = harness.action_class(step.class_index);
    const std::size_t slots = cls.consumes.size() + (cls.produces ? 1 : 0);
    const std::size_t expected = slots + (cls.spec.domain_size > 0 ? 1 : 0);
    if (raw.numbers.size() != expected) {
      throw TestFormatError("step '" + raw.class_id + "' needs " + std::to_string(expected) +
                            " numbers, got " + std::to_string(raw.numbers.size()));
    }
    step.slots.assign(raw.numbers.begin(), raw.numbers.begin() + static_cast<std::ptrdiff_t>(slots));
    if (cls.spec.domain_size > 0) step.value = raw.numbers.back();
    test.steps.push_back(std::move(step));
  }
  return test;
}

std::string format_test(const Harness& harness, const TestCase& test,
                        const std::map<std::string, std::string>& meta) {
  std::ostringstream out;
  out << "seed=" << test.seed << '\n';
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  for (const auto& step : test.steps) {
    const ActionClass& cls = harness.action_class(step.class_index);
    out << cls.id();
    for (auto s : step.slots) out << ' ' << s;
    if (cls.spec.domain_size > 0) out << ' ' << step.value;
    out << '\n';
  }
  return out.str();
}

}  // namespace locbias
