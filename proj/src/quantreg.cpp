#include "qcv/quantreg.hpp"

#include <cmath>

#include "qcv/errors.hpp"

namespace qcv {

namespace {

// Largest alpha in (0, 1] keeping v + alpha*dv >= (1-damp)*v componentwise.
double ratio_step(const Eigen::ArrayXd& v, const Eigen::ArrayXd& dv) {
  double alpha = 1.0;
  for (long i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) {
      const double a = -v[i] / dv[i];
      if (a < alpha) alpha = a;
    }
  }
  return alpha;
}

}  // namespace

QuantRegFit quantile_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau,
                                double tol, int max_iter) {
  const long n = X.rows(), p = X.cols();
  if (n < p) throw Error(Errc::too_short, "quantile_regression: fewer rows than columns");
  const double damp = 0.9995;

  // Dual LP: min c'd s.t. X'd = (1-tau) X'1, 0 <= d <= 1, with c = -y.
  const Eigen::VectorXd c = -y;
  const Eigen::VectorXd b = (1.0 - tau) * (X.transpose() * Eigen::VectorXd::Ones(n));

  Eigen::ArrayXd d = Eigen::ArrayXd::Constant(n, 1.0 - tau);
  Eigen::ArrayXd s = Eigen::ArrayXd::Constant(n, tau);

  Eigen::LDLT<Eigen::MatrixXd> xtx(X.transpose() * X);
  if (xtx.info() != Eigen::Success) throw Error(Errc::singular_design, "quantile_regression: X'X");
  Eigen::VectorXd gamma = xtx.solve(X.transpose() * c);
  Eigen::ArrayXd r = (c - X * gamma).array();
  const double bump = 1e-4 * (1.0 + r.abs().maxCoeff());
  Eigen::ArrayXd z = r.max(0.0) + bump;
  Eigen::ArrayXd w = (-r).max(0.0) + bump;

  QuantRegFit fit;
  double gap = (c.array() * d).sum() - b.dot(gamma) + w.sum();
  const double scale = 1.0 + y.array().abs().sum();

  for (int iter = 0; iter < max_iter; ++iter) {
    if (gap < tol * scale) {
      fit.beta = -gamma;
      fit.duality_gap = gap;
      fit.iterations = iter;
      return fit;
    }
    const Eigen::ArrayXd q = 1.0 / (z / d + w / s);
    const Eigen::ArrayXd rzw = z - w;

    Eigen::MatrixXd M = X.transpose() * q.matrix().asDiagonal() * X;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw Error(Errc::singular_design, "quantile_regression: rank-deficient design");

    // Affine scaling direction.
    Eigen::VectorXd dgamma = llt.solve(X.transpose() * (q * rzw).matrix());
    Eigen::ArrayXd dd = q * ((X * dgamma).array() - rzw);
    Eigen::ArrayXd dz = -z - (z / d) * dd;
    Eigen::ArrayXd dw = -w + (w / s) * dd;

    double ap = std::min({1.0, damp * ratio_step(d, dd), damp * ratio_step(s, -dd)});
    double ad = std::min({1.0, damp * ratio_step(z, dz), damp * ratio_step(w, dw)});

    if (std::min(ap, ad) < 1.0) {
      // Mehrotra corrector.
      const double g = (d * z).sum() + (s * w).sum();
      const double g_aff =
          ((d + ap * dd) * (z + ad * dz)).sum() + ((s - ap * dd) * (w + ad * dw)).sum();
      const double mu = std::pow(g_aff / g, 3) * g / (2.0 * static_cast<double>(n));

      const Eigen::ArrayXd corr_z = dd * dz;
      const Eigen::ArrayXd corr_w = (-dd) * dw;
      const Eigen::ArrayXd extra = mu * (1.0 / d - 1.0 / s) - corr_z / d + corr_w / s;

      dgamma = llt.solve(X.transpose() * (q * (rzw - extra)).matrix());
      dd = q * ((X * dgamma).array() - rzw + extra);
      dz = mu / d - z - (z / d) * dd - corr_z / d;
      dw = mu / s - w + (w / s) * dd - corr_w / s;

      ap = std::min({1.0, damp * ratio_step(d, dd), damp * ratio_step(s, -dd)});
      ad = std::min({1.0, damp * ratio_step(z, dz), damp * ratio_step(w, dw)});
    }

    d += ap * dd;
    s -= ap * dd;
    gamma += ad * dgamma;
    z += ad * dz;
    w += ad * dw;
    gap = (c.array() * d).sum() - b.dot(gamma) + w.sum();
  }
  throw Error(Errc::non_convergence, "quantile_regression: duality gap " + std::to_string(gap));
}

}  // namespace qcv
