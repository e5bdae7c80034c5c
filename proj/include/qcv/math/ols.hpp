#pragma once

#include <Eigen/Dense>

namespace qcv {

/// Ordinary least squares with classical (homoskedastic) standard errors.
struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;
  double rss = 0.0;
  double sigma2 = 0.0;  // RSS / (n - k)
  long n = 0;
  long k = 0;
};

/// Throws Error(singular_design) when X'X is numerically singular.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace qcv
