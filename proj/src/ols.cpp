#include "qcv/math/ols.hpp"

#include <cmath>

#include "qcv/errors.hpp"

namespace qcv {

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const long n = X.rows(), k = X.cols();
  if (n <= k) throw Error(Errc::too_short, "ols: need more observations than regressors");
  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success ||
      (ldlt.vectorD().array().abs() < 1e-12 * xtx.diagonal().array().abs().maxCoeff()).any()) {
    throw Error(Errc::singular_design, "ols: X'X is singular");
  }
  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.beta = ldlt.solve(X.transpose() * y);
  fit.residuals = y - X * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  fit.sigma2 = fit.rss / static_cast<double>(n - k);
  fit.xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.se = (fit.sigma2 * fit.xtx_inv.diagonal().array()).sqrt();
  return fit;
}

}  // namespace qcv
