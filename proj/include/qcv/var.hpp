#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcv/series.hpp"
#include "qcv/unit_root.hpp"

namespace qcv {

struct VarModel {
  std::vector<std::string> variables;
  int lag = 0;
  int t_effective = 0;
  // One row per equation; columns [intercept, lag-1 block, ..., lag-p block],
  // each block ordered like `variables`.
  Eigen::MatrixXd coefficients;
  Eigen::MatrixXd sigma;  // residual covariance, T-denominator
  std::vector<Series> residuals;
  double aic = 0.0;
  double bic = 0.0;
  // Shared regressor cross-product inverse and per-equation dof-corrected
  // residual variances, kept for Wald tests.
  Eigen::MatrixXd xtx_inv;
  Eigen::VectorXd eq_sigma2;
};

struct GrangerTestResult {
  std::string cause;
  std::string effect;
  int lag = 0;
  double chi_sq = 0.0;  // Wald statistic, chi-square(lag) under the null
  double p_value = 1.0;
  bool decision = false;  // reject "no causality" at 10%
};

/// Equation-by-equation OLS estimate of a VAR(p) with intercepts. All series
/// must share identical timestamps.
VarModel fit_var(const std::vector<Series>& system, int p);

/// Chooses the lag in 1..max_p by information criterion, each candidate on
/// its own maximal sample. Ties take the smaller lag.
int select_lag(const std::vector<Series>& system, int max_p,
               InfoCriterion criterion);

/// Wald test that all lags of `cause` have zero coefficients in the `effect`
/// equation, using the equation-level homoskedastic covariance.
GrangerTestResult granger_wald(const VarModel& model, const std::string& cause,
                               const std::string& effect);

}  // namespace qcv
