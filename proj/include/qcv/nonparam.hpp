#pragma once

#include <optional>
#include <string>

#include "qcv/series.hpp"

namespace qcv {

struct NonparamCausalityResult {
  std::string test;  // "HJ" or "DP"
  std::string cause;
  std::string effect;
  int lag = 1;
  double epsilon = 0.0;
  double statistic = 0.0;  // asymptotically standard normal, upper tail rejects
  double p_value = 1.0;
};

/// Hiemstra-Jones nonparametric test of "cause Granger-causes effect" with
/// equal lag lengths on both histories. Both series are standardized to unit
/// variance; distances use the sup norm with bandwidth eps.
NonparamCausalityResult hj_test(const Series& cause, const Series& effect,
                                int lag, double eps = 1.5);

/// Diks-Panchenko bias-corrected nonparametric causality test. When eps is
/// not given it uses max(1.5, 7.5 n^{-2/7}) on the standardized scale.
NonparamCausalityResult dp_test(const Series& cause, const Series& effect,
                                int lag,
                                std::optional<double> eps = std::nullopt);

}  // namespace qcv
