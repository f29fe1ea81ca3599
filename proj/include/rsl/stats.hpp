#pragma once

#include <cstdint>
#include <vector>

namespace rsl::stats {

enum class TestMethod { kExact, kNormalApprox };

// Method selection: kAuto follows the size thresholds below; the forced
// modes exist so the two paths can be compared on the same data.
enum class MethodChoice { kAuto, kForceExact, kForceApprox };

struct TestReport {
  double statistic = 0.0;  // U (first sample) or W = min(W+, W-)
  double p_value = 1.0;    // two-sided, capped at 1
  TestMethod method = TestMethod::kExact;
  double alpha = 0.05;
  bool significant = false;  // p < alpha
};

// Rank-sum test with midranks. Exact two-sided p by full enumeration of the
// U distribution when n*m <= 400 and the combined sample is tie-free,
// otherwise normal approximation with tie and continuity corrections.
TestReport mann_whitney_u(const std::vector<double>& xs,
                          const std::vector<double>& ys, double alpha = 0.05,
                          MethodChoice choice = MethodChoice::kAuto);

// Paired signed-rank test; zero differences are discarded. Exact two-sided p
// over all 2^n sign patterns when n <= 20, otherwise normal approximation
// with continuity correction.
TestReport wilcoxon_signed_rank(const std::vector<double>& xs,
                                const std::vector<double>& ys,
                                double alpha = 0.05,
                                MethodChoice choice = MethodChoice::kAuto);

// Midranks (1-based, ties averaged) of the input values.
std::vector<double> midranks(const std::vector<double>& values);

// Standard normal survival-based two-sided p for a z-score: erfc(z / sqrt 2).
double two_sided_normal_p(double z);

}  // namespace rsl::stats
