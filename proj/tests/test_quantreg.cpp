#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/quantreg.hpp"

using namespace qcv;

namespace {

double check_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& beta, double tau) {
  double total = 0.0;
  Eigen::VectorXd r = y - X * beta;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    total += r(i) >= 0 ? tau * r(i) : (tau - 1.0) * r(i);
  return total;
}

/// Brute-force LP oracle: an optimal quantile-regression plane interpolates
/// p observations, so enumerate all p-subsets, solve exactly, keep the
/// feasible candidate with the smallest check loss.
double best_vertex_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> comb(static_cast<std::size_t>(p));
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == p) {
      Eigen::MatrixXd sub(p, p);
      Eigen::VectorXd suby(p);
      for (int a = 0; a < p; ++a) {
        sub.row(a) = X.row(comb[static_cast<std::size_t>(a)]);
        suby(a) = y(comb[static_cast<std::size_t>(a)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd beta = lu.solve(suby);
      best = std::min(best, check_loss(X, y, beta, tau));
      return;
    }
    for (int i = start; i <= n - (p - k); ++i) {
      comb[static_cast<std::size_t>(k)] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("intercept-only regression recovers the sample quantile loss") {
  Rng rng(31);
  Eigen::VectorXd y(25);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.normal();
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(25, 1);
  for (double tau : {0.1, 0.25, 0.5, 0.8}) {
    QuantRegFit fit = quantile_regression(X, y, tau);
    // the optimal intercept-only loss is attained at an order statistic
    std::vector<double> v(y.data(), y.data() + y.size());
    double best = std::numeric_limits<double>::infinity();
    for (double c : v) {
      Eigen::VectorXd beta(1);
      beta << c;
      best = std::min(best, check_loss(X, y, beta, tau));
    }
    CHECK(check_loss(X, y, fit.beta, tau) == doctest::Approx(best).epsilon(1e-8));
  }
}

TEST_CASE("matches the vertex-enumeration oracle on small random problems") {
  Rng rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    int n = 8 + static_cast<int>(rng.below(5));  // 8..12
    int p = 2 + static_cast<int>(rng.below(2));  // 2..3
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      for (int j = 1; j < p; ++j) X(i, j) = rng.normal();
      y(i) = rng.normal();
    }
    for (double tau : {0.2, 0.5, 0.7}) {
      QuantRegFit fit = quantile_regression(X, y, tau);
      double got = check_loss(X, y, fit.beta, tau);
      double want = best_vertex_loss(X, y, tau);
      CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }
  }
}

TEST_CASE("subgradient optimality conditions hold") {
  Rng rng(33);
  const int n = 60, p = 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = rng.uniform();
    y(i) = 0.5 + X(i, 1) - 2.0 * X(i, 2) + rng.normal();
  }
  for (double tau : {0.3, 0.5, 0.9}) {
    QuantRegFit fit = quantile_regression(X, y, tau);
    Eigen::VectorXd r = y - X * fit.beta;
    // sum over strict signs plus worst-case placement of on-plane points
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(p), hi = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      double a;
      if (r(i) > 1e-7) a = tau;
      else if (r(i) < -1e-7) a = tau - 1.0;
      else {
        for (int j = 0; j < p; ++j) {
          lo(j) += std::min((tau - 1.0) * X(i, j), tau * X(i, j));
          hi(j) += std::max((tau - 1.0) * X(i, j), tau * X(i, j));
        }
        continue;
      }
      for (int j = 0; j < p; ++j) {
        lo(j) += a * X(i, j);
        hi(j) += a * X(i, j);
      }
    }
    for (int j = 0; j < p; ++j) {
      CHECK(lo(j) <= 1e-6);
      CHECK(hi(j) >= -1e-6);
    }
  }
}

TEST_CASE("median regression on symmetric exact data") {
  Eigen::MatrixXd X(5, 2);
  X << 1, 1, 1, 2, 1, 3, 1, 4, 1, 5;
  Eigen::VectorXd y(5);
  y << 2.0, 4.0, 6.0, 8.0, 10.0;  // exactly 2 x
  QuantRegFit fit = quantile_regression(X, y, 0.5);
  CHECK(fit.beta(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(fit.beta(1) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("rank-deficient design throws") {
  Eigen::MatrixXd X(6, 2);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = 3.0;
  }
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
  CHECK_THROWS_AS(quantile_regression(X, y, 0.5), Error);
}
