#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace locbias::stats {

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// "greater" tests whether the first sample (or x in a pair) tends to be larger.
enum class Alternative { two_sided, greater, less };

// Exact p-values are kept as a ratio of integer counts so they can be
// compared without rounding.
struct ExactP {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  friend bool operator==(const ExactP&, const ExactP&) = default;
};

struct MannWhitneyResult {
  double u = 0;        // U statistic of the first sample
  double u_other = 0;  // n1 * n2 - u
  double p = 1;
  bool exact = false;
  ExactP exact_p;  // meaningful when exact
};

// Rank-sum test with average ranks for ties. Exact (enumerated U
// distribution) when n1 * n2 <= 64 and there are no ties; otherwise the
// normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney(std::span<const double> xs, std::span<const double> ys,
                               Alternative alternative = Alternative::two_sided);

struct WilcoxonResult {
  double w_plus = 0;
  double w_minus = 0;
  std::size_t n = 0;  // pairs with a non-zero difference
  double p = 1;
  bool exact = false;
  ExactP exact_p;
};

// Signed-rank test on differences. Zero differences are dropped; exact
// enumeration of sign patterns when at most 12 remain.
WilcoxonResult wilcoxon(std::span<const double> differences,
                        Alternative alternative = Alternative::two_sided);
WilcoxonResult wilcoxon(std::span<const std::pair<double, double>> pairs,
                        Alternative alternative = Alternative::two_sided);

// Average ranks (1-based) of the values; ties share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

double mean(std::span<const double> values);
double median(std::span<const double> values);

}  // namespace locbias::stats
