#include <gtest/gtest.h>

#include "locbias/testcase_io.hpp"
#include "support/toy_harness.hpp"

using namespace locbias;

TEST(TestFile, FormatThenParseRoundTrips) {
  auto h = toy::toy_harness();
  TestCase t{123456789012345ULL,
             {{h->class_index("int_init"), {1}, 3},
              {h->class_index("box_new"), {0}, 0},
              {h->class_index("f40"), {1, 0}, 0},
              {h->class_index("mixed"), {0}, 1}}};
  const std::string text = format_test(*h, t, {{"harness", "toy"}, {"signature", "small:too-big"}});
  EXPECT_EQ(text,
            "seed=123456789012345\n"
            "# harness=toy\n"
            "# signature=small:too-big\n"
            "int_init 1 3\n"
            "box_new 0\n"
            "f40 1 0\n"
            "mixed 0 1\n");
  const TestFile file = parse_test_file(text);
  EXPECT_EQ(file.meta.at("signature"), "small:too-big");
  EXPECT_EQ(bind_test(file, *h), t);
}

TEST(TestFile, ToleratesBlankLinesAndCarriageReturns) {
  const auto file = parse_test_file("\r\n# note without equals\nseed=5\r\n\nbox_new   0\r\n");
  EXPECT_EQ(file.seed, 5u);
  ASSERT_EQ(file.steps.size(), 1u);
  EXPECT_EQ(file.steps[0].class_id, "box_new");
  EXPECT_TRUE(file.meta.empty());
}

TEST(TestFile, MalformedInputIsRejected) {
  EXPECT_THROW(parse_test_file(""), TestFormatError);
  EXPECT_THROW(parse_test_file("box_new 0\n"), TestFormatError);
  EXPECT_THROW(parse_test_file("seed=x\n"), TestFormatError);
  EXPECT_THROW(parse_test_file("seed=1\nbox_new -1\n"), TestFormatError);
}

TEST(TestFile, BindingChecksClassesAndArity) {
  auto h = toy::toy_harness();
  EXPECT_THROW(bind_test(parse_test_file("seed=1\nnope 0\n"), *h), UnknownActionClass);
  EXPECT_THROW(bind_test(parse_test_file("seed=1\nint_init 0\n"), *h), TestFormatError);
  EXPECT_THROW(bind_test(parse_test_file("seed=1\nbox_new 0 1\n"), *h), TestFormatError);
}
