#include "neurograph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neurograph/error.hpp"

namespace ng {

namespace {
constexpr double kTol = 1e-9;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// sum of t^3 - t over tie groups
double tie_term(const std::vector<double>& sorted) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}
}  // namespace

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

TestResult mann_whitney_u(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.empty() || b.empty())
    fail_invalid("mann_whitney_u needs two nonempty samples");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;

  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks = midranks(pooled);

  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u1 = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;
  const double u2 = static_cast<double>(n1 * n2) - u1;
  const double u = std::min(u1, u2);

  TestResult result;
  result.statistic = u;

  if (n <= 12) {
    // every n1-subset of the pooled ranks is equally likely under H0
    std::vector<std::size_t> comb(n1);
    std::iota(comb.begin(), comb.end(), 0);
    std::size_t total = 0, at_most = 0;
    for (;;) {
      double rsum = 0.0;
      for (std::size_t idx : comb) rsum += ranks[idx];
      double pu1 = rsum - static_cast<double>(n1 * (n1 + 1)) / 2.0;
      double pu = std::min(pu1, static_cast<double>(n1 * n2) - pu1);
      ++total;
      if (pu <= u + kTol) ++at_most;
      // next combination
      std::size_t i = n1;
      while (i > 0 && comb[i - 1] == n - n1 + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < n1; ++j) comb[j] = comb[j - 1] + 1;
    }
    result.p_value = static_cast<double>(at_most) / static_cast<double>(total);
    result.method = "exact";
    return result;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  const double nn = static_cast<double>(n);
  const double prod = static_cast<double>(n1) * static_cast<double>(n2);
  double var =
      prod / 12.0 * ((nn + 1.0) - tie_term(sorted) / (nn * (nn - 1.0)));
  if (var <= 0.0) {  // all pooled values identical
    result.p_value = 1.0;
    result.method = "normal";
    return result;
  }
  const double mu = prod / 2.0;
  const double z = (u - mu + 0.5) / std::sqrt(var);
  result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  result.method = "normal";
  return result;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size())
    fail_invalid("wilcoxon_signed_rank needs equal-length paired samples");
  if (a.empty()) fail_invalid("wilcoxon_signed_rank on empty samples");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult result;
  if (diffs.empty()) {
    result.all_zero = true;
    result.method = "exact";
    result.p_value = 1.0;
    warn("wilcoxon_signed_rank: all differences zero");
    return result;
  }

  const std::size_t n = diffs.size();
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(diffs[i]);
  std::vector<double> ranks = midranks(mags);

  double w_plus = 0.0, total_rank = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_rank += ranks[i];
    if (diffs[i] > 0.0) w_plus += ranks[i];
  }
  const double w_minus = total_rank - w_plus;
  const double w = std::min(w_plus, w_minus);
  result.statistic = w;

  if (n <= 12) {
    const std::size_t patterns = std::size_t{1} << n;
    std::size_t at_most = 0;
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      double wm = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::size_t{1} << i)) wm += ranks[i];
      double stat = std::min(wm, total_rank - wm);
      if (stat <= w + kTol) ++at_most;
    }
    result.p_value =
        static_cast<double>(at_most) / static_cast<double>(patterns);
    result.method = "exact";
    return result;
  }

  const double nn = static_cast<double>(n);
  std::vector<double> sorted_mags = mags;
  std::sort(sorted_mags.begin(), sorted_mags.end());
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 -
               tie_term(sorted_mags) / 48.0;
  if (var <= 0.0) {
    result.p_value = 1.0;
    result.method = "normal";
    return result;
  }
  const double mu = nn * (nn + 1.0) / 4.0;
  const double z = (w - mu + 0.5) / std::sqrt(var);
  result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  result.method = "normal";
  return result;
}

}  // namespace ng
