#include "locbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace locbias::stats {

namespace {

constexpr std::size_t kMannWhitneyExactLimit = 64;  // n1 * n2
constexpr std::size_t kWilcoxonExactLimit = 12;

double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Sum over tie groups of t^3 - t.
double tie_term(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

// p-value from lower/upper tail counts of a discrete null distribution.
ExactP tail_p(std::uint64_t lower, std::uint64_t upper, std::uint64_t total,
              Alternative alternative) {
  switch (alternative) {
    case Alternative::greater: return {upper, total};
    case Alternative::less: return {lower, total};
    case Alternative::two_sided: break;
  }
  return {std::min(total, 2 * std::min(lower, upper)), total};
}

double to_double(const ExactP& p) {
  return static_cast<double>(p.numerator) / static_cast<double>(p.denominator);
}

// Continuity-corrected normal p for a statistic with the given mean/sd.
double normal_p(double stat, double mu, double sd, Alternative alternative) {
  if (sd <= 0) return 1.0;
  switch (alternative) {
    case Alternative::greater: return normal_upper((stat - mu - 0.5) / sd);
    case Alternative::less: return 1.0 - normal_upper((stat - mu + 0.5) / sd);
    case Alternative::two_sided: break;
  }
  const double z = std::max(0.0, std::abs(stat - mu) - 0.5) / sd;
  return std::min(1.0, 2.0 * normal_upper(z));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

MannWhitneyResult mann_whitney(std::span<const double> xs, std::span<const double> ys,
                               Alternative alternative) {
  if (xs.empty() || ys.empty()) throw StatsError("mann_whitney: empty sample");
  const std::size_t n1 = xs.size();
  const std::size_t n2 = ys.size();

  std::vector<double> all(xs.begin(), xs.end());
  all.insert(all.end(), ys.begin(), ys.end());
  const auto ranks = average_ranks(all);
  const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

  MannWhitneyResult r;
  const double nn = static_cast<double>(n1) * static_cast<double>(n2);
  r.u = rank_sum - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  r.u_other = nn - r.u;

  const double ties = tie_term(all);
  if (n1 * n2 <= kMannWhitneyExactLimit && ties == 0) {
    // counts[i][j][u]: orderings of i x's and j y's whose x-sample U equals u.
    // Placing the largest element: an x adds j to U, a y adds nothing.
    const std::size_t max_u = n1 * n2;
    std::vector<std::vector<std::vector<std::uint64_t>>> counts(
        n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1, std::vector<std::uint64_t>(max_u + 1, 0)));
    for (std::size_t i = 0; i <= n1; ++i) {
      for (std::size_t j = 0; j <= n2; ++j) {
        if (i == 0 || j == 0) {
          counts[i][j][0] = 1;
          continue;
        }
        for (std::size_t u = 0; u <= i * j; ++u) {
          std::uint64_t c = counts[i][j - 1][u];
          if (u >= j) c += counts[i - 1][j][u - j];
          counts[i][j][u] = c;
        }
      }
    }
    const auto& dist = counts[n1][n2];
    const auto u_obs = static_cast<std::size_t>(std::llround(r.u));
    std::uint64_t lower = 0, upper = 0, total = 0;
    for (std::size_t u = 0; u <= max_u; ++u) {
      total += dist[u];
      if (u <= u_obs) lower += dist[u];
      if (u >= u_obs) upper += dist[u];
    }
    r.exact = true;
    r.exact_p = tail_p(lower, upper, total, alternative);
    r.p = to_double(r.exact_p);
    return r;
  }

  const double n = static_cast<double>(n1 + n2);
  const double mu = nn / 2.0;
  const double var = nn / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  r.p = normal_p(r.u, mu, var > 0 ? std::sqrt(var) : 0.0, alternative);
  return r;
}

WilcoxonResult wilcoxon(std::span<const double> differences, Alternative alternative) {
  if (differences.empty()) throw StatsError("wilcoxon: empty input");
  std::vector<double> nonzero;
  for (double d : differences) {
    if (d != 0) nonzero.push_back(d);
  }
  WilcoxonResult r;
  r.n = nonzero.size();
  if (r.n == 0) {
    r.exact = true;
    r.exact_p = {1, 1};
    r.p = 1.0;
    return r;
  }

  std::vector<double> magnitudes;
  magnitudes.reserve(r.n);
  for (double d : nonzero) magnitudes.push_back(std::abs(d));
  const auto ranks = average_ranks(magnitudes);
  for (std::size_t i = 0; i < r.n; ++i) {
    (nonzero[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  }

  if (r.n <= kWilcoxonExactLimit) {
    // Average ranks are multiples of 1/2; count sign patterns by doubled W+.
    std::vector<std::size_t> doubled;
    std::size_t max_sum = 0;
    for (double rank : ranks) {
      doubled.push_back(static_cast<std::size_t>(std::llround(2 * rank)));
      max_sum += doubled.back();
    }
    std::vector<std::uint64_t> dist(max_sum + 1, 0);
    dist[0] = 1;
    std::size_t reach = 0;
    for (std::size_t d : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (dist[s] != 0) dist[s + d] += dist[s];
      }
      reach += d;
    }
    const auto w_obs = static_cast<std::size_t>(std::llround(2 * r.w_plus));
    std::uint64_t lower = 0, upper = 0, total = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      total += dist[s];
      if (s <= w_obs) lower += dist[s];
      if (s >= w_obs) upper += dist[s];
    }
    r.exact = true;
    r.exact_p = tail_p(lower, upper, total, alternative);
    r.p = to_double(r.exact_p);
    return r;
  }

  const double n = static_cast<double>(r.n);
  const double mu = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
  r.p = normal_p(r.w_plus, mu, var > 0 ? std::sqrt(var) : 0.0, alternative);
  return r;
}

WilcoxonResult wilcoxon(std::span<const std::pair<double, double>> pairs, Alternative alternative) {
  std::vector<double> differences;
  differences.reserve(pairs.size());
  for (const auto& [x, y] : pairs) differences.push_back(x - y);
  return wilcoxon(differences, alternative);
}

}  // namespace locbias::stats
