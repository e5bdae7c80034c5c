#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "qcv/series.hpp"

namespace qcv {

struct QuantileGrid {
  enum class Kind { deciles, vigintiles, custom };
  Kind kind = Kind::custom;
  std::vector<double> levels;

  /// 0.1, 0.2, ..., 0.9
  static QuantileGrid deciles();
  /// 0.05, 0.10, ..., 0.95
  static QuantileGrid vigintiles();
  static QuantileGrid custom(std::vector<double> levels);

  void validate() const;
  int size() const { return static_cast<int>(levels.size()); }
};

/// Quantile autoregression fit across a grid of levels. The conditional
/// quantile at level tau is intercept(tau) + sum_i mu_{i+1}(tau) y_{t-i};
/// any location-scale quantile shift is absorbed into the intercept, and
/// sigma is reported only as a diagnostic innovation scale.
struct QarModel {
  int order = 1;
  QuantileGrid grid;
  // theta row j: [intercept, mu_2, ..., mu_{order+1}] for grid level j
  Eigen::MatrixXd theta;
  double sigma = 0.0;
  // Fitted conditional quantiles on the effective sample, one row per
  // observation, one column per grid level, after monotone rearrangement.
  Eigen::MatrixXd fitted_quantiles;
  bool crossing_repaired = false;
  int t_offset = 0;  // index of the first effective observation

  Eigen::VectorXd coefficients(double tau) const;
  /// Conditional quantile for a row of lagged values [y_{t-1}..y_{t-order}].
  double predict(const Eigen::VectorXd& lags, int level_index) const;
};

/// Fits a QAR(order) by check-loss minimization at every grid level.
/// start_offset extends the effective sample start beyond `order` so a fit
/// can share a sample with tests that condition on longer histories.
QarModel fit_qar(const Series& y, int order, const QuantileGrid& grid,
                 int start_offset = -1);

/// Same, on a raw window of values (used by subsampling).
QarModel fit_qar_values(const std::vector<double>& y, int order,
                        const QuantileGrid& grid, int start_offset = -1);

}  // namespace qcv
