#ifndef NEUROGRAPH_STATS_HPP
#define NEUROGRAPH_STATS_HPP

#include <string>
#include <vector>

namespace ng {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;    // "exact" or "normal"
  bool all_zero = false; // signed-rank test saw only zero differences
};

// Two-sided Mann-Whitney U with midranks for ties. U = min(U1, U2); the
// p-value is exact (full permutation enumeration) when n_a + n_b <= 12,
// otherwise a tie-corrected normal approximation with continuity correction.
TestResult mann_whitney_u(const std::vector<double>& a,
                          const std::vector<double>& b);

// Two-sided paired Wilcoxon signed-rank. Zero differences are dropped;
// statistic is min(W+, W-) over signed midranks. Exact sign enumeration for
// n <= 12, normal approximation beyond. All-zero input returns p = 1
// with the all_zero flag set.
TestResult wilcoxon_signed_rank(const std::vector<double>& a,
                                const std::vector<double>& b);

// Average ranks (1-based) with ties sharing their midrank.
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace ng

#endif
