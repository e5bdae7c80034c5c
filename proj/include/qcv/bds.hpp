#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcv/series.hpp"

namespace qcv {

struct EpsilonRule {
  enum class Kind { times_std, absolute };
  Kind kind = Kind::times_std;
  double value = 0.7;

  static EpsilonRule times_std(double factor) {
    return {Kind::times_std, factor};
  }
  static EpsilonRule absolute(double eps) { return {Kind::absolute, eps}; }
};

struct BdsDimension {
  double statistic = 0.0;
  double p_value = 1.0;
  double correlation_integral = 0.0;
};

struct BdsResult {
  double epsilon = 0.0;
  int n = 0;
  std::map<int, BdsDimension> per_dimension;  // keyed by embedding dimension
};

/// Fraction of pairs of m-histories within sup-norm distance eps. Histories
/// are fully contained in the sample (ends t = m..n).
double correlation_integral(const std::vector<double>& x, int m, double eps);

/// BDS independence test for embedding dimensions 2..max_dim. Statistics are
/// asymptotically standard normal under iid; p-values are two-sided.
BdsResult bds_test(const Series& s, int max_dim, EpsilonRule rule);

/// Convenience: fit a VAR(lag) to the system and run the BDS test on each
/// equation's residual series.
std::map<std::string, BdsResult> bds_on_var_residuals(
    const std::vector<Series>& system, int lag, int max_dim = 6,
    EpsilonRule rule = {});

}  // namespace qcv
