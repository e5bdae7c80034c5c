#pragma once

#include <Eigen/Dense>

namespace qcv {

struct QuantRegFit {
  Eigen::VectorXd beta;
  double duality_gap = 0.0;
  int iterations = 0;
};

/// Check-loss minimizer: beta = argmin sum_i rho_tau(y_i - x_i' beta).
///
/// Solves the bounded-variable dual LP with a Mehrotra predictor-corrector
/// interior point (Frisch-Newton). Converges to the analytic center of the
/// optimal face, which makes the answer deterministic under degeneracy.
///
/// Throws Error(singular_design) on rank-deficient X and
/// Error(non_convergence) if the duality gap target is not reached.
QuantRegFit quantile_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                                double tol = 1e-8, int max_iter = 200);

}  // namespace qcv
