#include "qcv/bds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/var.hpp"

namespace qcv {

double correlation_integral(const std::vector<double>& x, int m, double eps) {
  const int n = static_cast<int>(x.size());
  if (m < 1) throw Error(Errc::invalid_argument, "embedding dimension must be >= 1");
  const int histories = n - m + 1;
  if (histories < 2)
    throw Error(Errc::too_short, "need at least two embedded histories");
  long long hits = 0;
  for (int t = m; t <= n; ++t) {
    for (int s = t + 1; s <= n; ++s) {
      bool close = true;
      for (int l = 0; l < m; ++l) {
        if (std::abs(x[t - 1 - l] - x[s - 1 - l]) > eps) {
          close = false;
          break;
        }
      }
      hits += close;
    }
  }
  const double pairs = 0.5 * static_cast<double>(histories) * (histories - 1);
  return hits / pairs;
}

BdsResult bds_test(const Series& s, int max_dim, EpsilonRule rule) {
  s.validate();
  if (max_dim < 2) throw Error(Errc::invalid_argument, "max_dim must be >= 2");
  const auto& x = s.values;
  const int n = static_cast<int>(x.size());
  if (n < 50 || n < max_dim + 20)
    throw Error(Errc::too_short, "series too short for BDS at max_dim=" +
                                     std::to_string(max_dim));

  double eps = rule.value;
  if (rule.kind == EpsilonRule::Kind::times_std)
    eps = rule.value * std::sqrt(stats::sample_variance(x));
  if (!(eps > 0.0))
    throw Error(Errc::degenerate_epsilon, "nonpositive BDS epsilon");

  // Pair counts. run(t,s) = length of the consecutive match streak ending at
  // (t,s); a pair of m-histories ending at (t,s) matches iff run >= m. The
  // history must fit: t >= m (with t < s).
  std::vector<long long> cm_hits(max_dim + 1, 0);   // bucket by min(run, t, max_dim)
  std::vector<long long> c1m_hits(max_dim + 1, 0);  // bucket by min(t, max_dim)
  long long c1_hits = 0;
  std::vector<int> point_count(n, 0);  // neighbors of each point, full sample

  for (int d = 1; d < n; ++d) {
    int run = 0;
    for (int t = 1; t + d <= n; ++t) {
      const int u = t + d;
      const bool close = std::abs(x[t - 1] - x[u - 1]) <= eps;
      run = close ? run + 1 : 0;
      if (close) {
        ++c1_hits;
        ++point_count[t - 1];
        ++point_count[u - 1];
        ++c1m_hits[std::min(t, max_dim)];
      }
      if (run >= 2) ++cm_hits[std::min({run, t, max_dim})];
    }
  }

  const double all_pairs = 0.5 * static_cast<double>(n) * (n - 1);
  const double c1 = c1_hits / all_pairs;
  if (c1 <= 0.0 || c1 >= 1.0)
    throw Error(Errc::degenerate_epsilon,
                "correlation integral is degenerate at this epsilon");

  double k_hat = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = point_count[i];
    k_hat += c * (c - 1.0);
  }
  k_hat /= static_cast<double>(n) * (n - 1.0) * (n - 2.0);

  BdsResult out;
  out.epsilon = eps;
  out.n = n;

  // suffix sums: pairs with bucket >= m
  std::vector<long long> cm_ge(max_dim + 2, 0), c1m_ge(max_dim + 2, 0);
  for (int m = max_dim; m >= 1; --m) {
    cm_ge[m] = cm_ge[m + 1] + cm_hits[m];
    c1m_ge[m] = c1m_ge[m + 1] + c1m_hits[m];
  }

  const double c_pow2 = c1 * c1;
  for (int m = 2; m <= max_dim; ++m) {
    const int hist = n - m + 1;
    const double pairs = 0.5 * static_cast<double>(hist) * (hist - 1);
    const double cm = cm_ge[m] / pairs;
    const double c1m = c1m_ge[m] / pairs;

    double var = std::pow(k_hat, m) + (m - 1.0) * (m - 1.0) * std::pow(c_pow2, m) -
                 m * m * k_hat * std::pow(c_pow2, m - 1);
    for (int j = 1; j <= m - 1; ++j)
      var += 2.0 * std::pow(k_hat, m - j) * std::pow(c_pow2, j);
    var *= 4.0;
    if (!(var > 0.0))
      throw Error(Errc::degenerate_epsilon, "degenerate BDS variance");

    const double stat = std::sqrt(static_cast<double>(hist)) *
                        (cm - std::pow(c1m, m)) / std::sqrt(var);
    BdsDimension dim;
    dim.statistic = stat;
    dim.p_value = 2.0 * stats::norm_cdf(-std::abs(stat));
    dim.correlation_integral = cm;
    out.per_dimension[m] = dim;
  }
  return out;
}

std::map<std::string, BdsResult> bds_on_var_residuals(
    const std::vector<Series>& system, int lag, int max_dim, EpsilonRule rule) {
  VarModel model = fit_var(system, lag);
  std::map<std::string, BdsResult> out;
  for (const auto& resid : model.residuals)
    out[resid.name] = bds_test(resid, max_dim, rule);
  return out;
}

}  // namespace qcv
