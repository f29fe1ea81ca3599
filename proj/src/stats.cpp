#include "rsl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rsl/common.hpp"

namespace rsl::stats {

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
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double two_sided_normal_p(double z) {
  if (z < 0.0) z = 0.0;
  double p = std::erfc(z / std::sqrt(2.0));
  return std::min(1.0, p);
}

namespace {

// Count of rank arrangements with statistic value u, i.e. the coefficient of
// q^u in the Gaussian binomial [n+m choose n]_q. Exact in uint64 for the
// n*m <= 400 regime.
std::vector<unsigned long long> u_distribution(std::size_t n, std::size_t m) {
  const std::size_t u_max = n * m;
  // f[i][j][u]: last element of the sorted interleaving is either an x
  // (contributing j to U) or a y.
  std::vector<std::vector<std::vector<unsigned long long>>> f(
      n + 1, std::vector<std::vector<unsigned long long>>(
                 m + 1, std::vector<unsigned long long>(u_max + 1, 0)));
  for (std::size_t j = 0; j <= m; ++j) f[0][j][0] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    f[i][0][0] = 1;
    for (std::size_t j = 1; j <= m; ++j) {
      for (std::size_t u = 0; u <= u_max; ++u) {
        unsigned long long v = f[i][j - 1][u];
        if (u >= j) v += f[i - 1][j][u - j];
        f[i][j][u] = v;
      }
    }
  }
  return f[n][m];
}

bool has_ties(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) != values.end();
}

double tie_sum(const std::vector<double>& values) {
  std::map<double, std::size_t> groups;
  for (double v : values) ++groups[v];
  double s = 0.0;
  for (const auto& [v, t] : groups) {
    const double td = static_cast<double>(t);
    s += td * td * td - td;
  }
  return s;
}

}  // namespace

TestReport mann_whitney_u(const std::vector<double>& xs,
                          const std::vector<double>& ys, double alpha,
                          MethodChoice choice) {
  if (xs.empty() || ys.empty()) {
    throw std::invalid_argument("mann_whitney_u: both samples must be nonempty");
  }
  const std::size_t n = xs.size(), m = ys.size();
  std::vector<double> combined = xs;
  combined.insert(combined.end(), ys.begin(), ys.end());
  const std::vector<double> ranks = midranks(combined);

  double rank_sum_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) rank_sum_x += ranks[i];
  const double u_stat = rank_sum_x - static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;

  const bool tied = has_ties(combined);
  bool exact = n * m <= 400 && !tied;
  if (choice == MethodChoice::kForceExact) {
    if (tied) throw Error("mann_whitney_u: exact path requires tie-free samples");
    exact = true;
  } else if (choice == MethodChoice::kForceApprox) {
    exact = false;
  }

  TestReport report;
  report.statistic = u_stat;
  report.alpha = alpha;

  if (exact) {
    report.method = TestMethod::kExact;
    const std::vector<unsigned long long> dist = u_distribution(n, m);
    const std::size_t u_max = n * m;
    // Tie-free U is integral.
    const std::size_t u_obs = static_cast<std::size_t>(std::llround(u_stat));
    const std::size_t lo = std::min(u_obs, u_max - u_obs);
    const std::size_t hi = std::max(u_obs, u_max - u_obs);
    unsigned long long count = 0, total = 0;
    for (std::size_t u = 0; u <= u_max; ++u) {
      total += dist[u];
      if (u <= lo || u >= hi) count += dist[u];
    }
    report.p_value = std::min(1.0, static_cast<double>(count) / static_cast<double>(total));
  } else {
    report.method = TestMethod::kNormalApprox;
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    const double big_n = nd + md;
    const double mu = nd * md / 2.0;
    double var = nd * md / 12.0 * (big_n + 1.0);
    if (big_n > 1.0) {
      var = nd * md / 12.0 * (big_n + 1.0 - tie_sum(combined) / (big_n * (big_n - 1.0)));
    }
    if (var <= 0.0) {
      report.p_value = 1.0;
    } else {
      const double z = (std::abs(u_stat - mu) - 0.5) / std::sqrt(var);
      report.p_value = two_sided_normal_p(z);
    }
  }
  report.significant = report.p_value < alpha;
  return report;
}

TestReport wilcoxon_signed_rank(const std::vector<double>& xs,
                                const std::vector<double>& ys, double alpha,
                                MethodChoice choice) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw std::invalid_argument("wilcoxon_signed_rank: paired samples of equal nonzero length");
  }
  std::vector<double> abs_d;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    if (d == 0.0) continue;  // zero differences discarded
    abs_d.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  if (abs_d.empty()) {
    throw Error("wilcoxon_signed_rank: degenerate sample, all differences zero");
  }
  const std::size_t n = abs_d.size();
  const std::vector<double> ranks = midranks(abs_d);

  double w_pos = 0.0, w_neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (positive[i] ? w_pos : w_neg) += ranks[i];
  }
  const double w_stat = std::min(w_pos, w_neg);
  const double rank_total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;

  bool exact = n <= 20;
  if (choice == MethodChoice::kForceExact) exact = true;
  if (choice == MethodChoice::kForceApprox) exact = false;

  TestReport report;
  report.statistic = w_stat;
  report.alpha = alpha;

  if (exact) {
    if (n > 30) throw Error("wilcoxon_signed_rank: exact path limited to n <= 30");
    report.method = TestMethod::kExact;
    // Subset-sum distribution of W+ over all 2^n sign patterns; ranks doubled
    // so midranks stay integral.
    std::vector<long long> ranks2(n);
    long long total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ranks2[i] = std::llround(2.0 * ranks[i]);
      total2 += ranks2[i];
    }
    std::vector<unsigned long long> dist(static_cast<std::size_t>(total2) + 1, 0);
    dist[0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = dist.size(); s-- > static_cast<std::size_t>(ranks2[i]);) {
        dist[s] += dist[s - static_cast<std::size_t>(ranks2[i])];
      }
    }
    const long long w2 = std::llround(2.0 * w_stat);
    unsigned long long count = 0;
    for (std::size_t s = 0; s < dist.size(); ++s) {
      const long long s_pos = static_cast<long long>(s);
      const long long s_min = std::min(s_pos, total2 - s_pos);
      if (s_min <= w2) count += dist[s];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
    report.p_value = std::min(1.0, static_cast<double>(count) / denom);
  } else {
    report.method = TestMethod::kNormalApprox;
    const double nd = static_cast<double>(n);
    const double mu = rank_total / 2.0;
    double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_sum(abs_d) / 48.0;
    if (var <= 0.0) {
      report.p_value = 1.0;
    } else {
      const double z = (std::abs(w_stat - mu) - 0.5) / std::sqrt(var);
      report.p_value = two_sided_normal_p(z);
    }
  }
  report.significant = report.p_value < alpha;
  return report;
}

}  // namespace rsl::stats
