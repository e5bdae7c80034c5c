#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/var.hpp"
#include "support/helpers.hpp"

using namespace qcv;

namespace {

/// Causal bivariate system: x AR(1), y loads on lagged x.
std::vector<Series> causal_system(int t_len, std::uint64_t seed, double load) {
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(t_len)), y(static_cast<std::size_t>(t_len));
  double xp = 0.0, yp = 0.0;
  for (int t = 0; t < t_len; ++t) {
    double xn = 0.5 * xp + rng.normal();
    double yn = 0.3 * yp + load * xp + rng.normal();
    x[static_cast<std::size_t>(t)] = xn;
    y[static_cast<std::size_t>(t)] = yn;
    xp = xn;
    yp = yn;
  }
  return {Series::from_values("x", std::move(x)), Series::from_values("y", std::move(y))};
}

}  // namespace

TEST_CASE("fit_var matches per-equation OLS computed densely") {
  auto system = causal_system(180, 41, 0.4);
  const int p = 2;
  VarModel model = fit_var(system, p);
  CHECK(model.lag == p);
  const int T = 180, n_eff = T - p, k = 1 + 2 * p;
  CHECK(model.t_effective == n_eff);

  Eigen::MatrixXd X(n_eff, k);
  Eigen::MatrixXd Y(n_eff, 2);
  for (int t = p; t < T; ++t) {
    int r = t - p;
    X(r, 0) = 1.0;
    for (int l = 1; l <= p; ++l) {
      X(r, 1 + 2 * (l - 1)) = system[0].values[static_cast<std::size_t>(t - l)];
      X(r, 2 + 2 * (l - 1)) = system[1].values[static_cast<std::size_t>(t - l)];
    }
    Y(r, 0) = system[0].values[static_cast<std::size_t>(t)];
    Y(r, 1) = system[1].values[static_cast<std::size_t>(t)];
  }
  Eigen::MatrixXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
  for (int eq = 0; eq < 2; ++eq)
    for (int j = 0; j < k; ++j)
      CHECK(model.coefficients(eq, j) == doctest::Approx(beta(j, eq)).epsilon(1e-9));

  Eigen::MatrixXd resid = Y - X * beta;
  Eigen::MatrixXd sigma = resid.transpose() * resid / n_eff;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(model.sigma(a, b) == doctest::Approx(sigma(a, b)).epsilon(1e-9));

  // information criteria: log det Sigma + penalty * (#params per T)
  double logdet = std::log(sigma.determinant());
  int n_par = 2 * k;
  double aic = logdet + 2.0 * n_par / n_eff;
  double bic = logdet + std::log(static_cast<double>(n_eff)) * n_par / n_eff;
  CHECK(model.aic == doctest::Approx(aic).epsilon(1e-9));
  CHECK(model.bic == doctest::Approx(bic).epsilon(1e-9));

  for (const auto& rs : model.residuals) CHECK(rs.size() == static_cast<std::size_t>(n_eff));
}

TEST_CASE("granger_wald equals the dense quadratic-form oracle") {
  auto system = causal_system(240, 42, 0.5);
  const int p = 2;
  VarModel model = fit_var(system, p);
  GrangerTestResult r = granger_wald(model, "x", "y");
  CHECK(r.cause == "x");
  CHECK(r.effect == "y");
  CHECK(r.lag == p);

  // oracle: W = b_R' [sigma2_eq (R (X'X)^-1 R')]^-1 b_R
  const int T = 240, n_eff = T - p, k = 1 + 2 * p;
  Eigen::MatrixXd X(n_eff, k);
  Eigen::VectorXd y_eq(n_eff);
  for (int t = p; t < T; ++t) {
    int row = t - p;
    X(row, 0) = 1.0;
    for (int l = 1; l <= p; ++l) {
      X(row, 1 + 2 * (l - 1)) = system[0].values[static_cast<std::size_t>(t - l)];
      X(row, 2 + 2 * (l - 1)) = system[1].values[static_cast<std::size_t>(t - l)];
    }
    y_eq(row) = system[1].values[static_cast<std::size_t>(t)];
  }
  Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y_eq);
  double sigma2 = (y_eq - X * beta).squaredNorm() / (n_eff - k);
  Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  // x-lag columns in the design are 1 and 3
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(p, k);
  R(0, 1) = 1.0;
  R(1, 3) = 1.0;
  Eigen::VectorXd br = R * beta;
  Eigen::MatrixXd mid = sigma2 * R * xtx_inv * R.transpose();
  double wald = br.dot(mid.ldlt().solve(br));
  CHECK(r.chi_sq == doctest::Approx(wald).epsilon(1e-8));
  CHECK(r.p_value == doctest::Approx(stats::chi2_sf(wald, p)).epsilon(1e-10));
  CHECK(r.decision == (r.p_value <= 0.10));
}

TEST_CASE("wald detects the causal direction") {
  auto system = causal_system(400, 43, 0.5);
  VarModel model = fit_var(system, 2);
  GrangerTestResult xy = granger_wald(model, "x", "y");
  GrangerTestResult yx = granger_wald(model, "y", "x");
  CHECK(xy.p_value < 0.01);
  CHECK(yx.p_value > xy.p_value);
  CHECK_THROWS_AS(granger_wald(model, "nope", "y"), Error);
}

TEST_CASE("select_lag is sane on a known-order system") {
  auto system = causal_system(600, 44, 0.5);  // true order 1
  int aic = select_lag(system, 8, InfoCriterion::AIC);
  int sic = select_lag(system, 8, InfoCriterion::SIC);
  CHECK(aic >= 1);
  CHECK(sic >= 1);
  CHECK(sic <= aic);  // SIC penalizes harder
  CHECK(sic <= 2);
}

TEST_CASE("mismatched timestamps are rejected") {
  Series a = Series::from_values("a", std::vector<double>(50, 1.0));
  Series b = Series::from_values("b", std::vector<double>(50, 1.0), {2001, 1});
  CHECK_THROWS_AS(fit_var({a, b}, 1), Error);
}
