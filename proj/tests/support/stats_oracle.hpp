#pragma once

// Brute-force reference p-values for the rank tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "locbias/stats.hpp"

namespace locbias::oracle {

using stats::ExactP;

// Counts of arrangements at or below / at or above the observed statistic.
struct Tails {
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  std::uint64_t total = 0;
};

inline bool same_ratio(std::uint64_t num, std::uint64_t den, const ExactP& p) {
  return static_cast<unsigned __int128>(num) * p.denominator ==
         static_cast<unsigned __int128>(p.numerator) * den;
}

inline std::uint64_t two_sided(const Tails& t) { return std::min(t.total, 2 * std::min(t.lower, t.upper)); }

// Enumerates every way of assigning ranks 1..n1+n2 to the first sample.
inline Tails brute_mann_whitney(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> all(xs);
  all.insert(all.end(), ys.begin(), ys.end());
  std::sort(all.begin(), all.end());
  double rank_sum = 0;
  for (double x : xs) rank_sum += static_cast<double>(std::find(all.begin(), all.end(), x) - all.begin() + 1);
  const double n1 = static_cast<double>(xs.size());
  const double observed = rank_sum - n1 * (n1 + 1) / 2;

  const std::size_t n = all.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(xs.size()), true);
  std::sort(pick.begin(), pick.end());
  Tails t;
  do {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) sum += static_cast<double>(i + 1);
    }
    const double u = sum - n1 * (n1 + 1) / 2;
    ++t.total;
    if (u <= observed) ++t.lower;
    if (u >= observed) ++t.upper;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return t;
}

// Enumerates all 2^n sign patterns over the ranks of |d|.
inline Tails brute_wilcoxon(const std::vector<double>& diffs) {
  std::vector<double> mags;
  for (double d : diffs) {
    if (d != 0) mags.push_back(std::abs(d));
  }
  const auto ranks = stats::average_ranks(mags);
  double observed = 0;
  {
    std::size_t k = 0;
    for (double d : diffs) {
      if (d == 0) continue;
      if (d > 0) observed += ranks[k];
      ++k;
    }
  }
  Tails t;
  const std::size_t n = mags.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) w += ranks[i];
    }
    ++t.total;
    if (w <= observed + 1e-9) ++t.lower;
    if (w >= observed - 1e-9) ++t.upper;
  }
  return t;
}

}  // namespace locbias::oracle
