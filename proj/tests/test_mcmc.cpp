#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/volatility/mcmc.hpp"
#include "qcv/volatility/spec.hpp"

using namespace qcv;
using namespace qcv::vol;

TEST_CASE("transforms invert and report the right jacobian") {
  struct Case {
    Transform tr;
    std::vector<double> naturals;
  };
  std::vector<Case> cases = {
      {Transform::identity(), {-3.0, 0.0, 2.5}},
      {Transform::log_pos(), {0.01, 0.8, 17.0}},
      {Transform::logit(-1.0, 1.0), {-0.95, 0.0, 0.7}},
      {Transform::logit(0.0, 0.1), {0.001, 0.05, 0.099}},
      {Transform::log_shift2(), {2.1, 5.0, 40.0}},
  };
  for (const auto& c : cases) {
    for (double x : c.naturals) {
      const double z = c.tr.to_unconstrained(x);
      CHECK(c.tr.to_natural(z) == doctest::Approx(x).epsilon(1e-12));
      // central difference of the natural map
      const double h = 1e-6;
      const double num =
          (c.tr.to_natural(z + h) - c.tr.to_natural(z - h)) / (2.0 * h);
      CHECK(c.tr.log_jacobian(z) ==
            doctest::Approx(std::log(std::abs(num))).epsilon(1e-6));
    }
  }
}

TEST_CASE("parameter transforms line up with parameter names") {
  auto kinds = [](const std::string& model) {
    std::vector<Transform::Kind> out;
    for (const auto& t : param_transforms(VolatilityModelSpec::from_name(model)))
      out.push_back(t.kind);
    return out;
  };
  using K = Transform::Kind;
  CHECK(kinds("GARCH") ==
        std::vector<K>{K::identity, K::log_pos, K::log_pos, K::log_pos});
  CHECK(kinds("GARCH-t") == std::vector<K>{K::identity, K::log_pos, K::log_pos,
                                           K::log_pos, K::log_shift2});
  CHECK(kinds("SV-L") == std::vector<K>{K::identity, K::identity, K::logit,
                                        K::log_pos, K::logit});
  CHECK(kinds("GARCH-J") == std::vector<K>{K::identity, K::log_pos, K::log_pos,
                                           K::log_pos, K::logit, K::identity,
                                           K::log_pos});
  // the jump intensity is bounded by the prior's kappa ceiling
  auto gj = param_transforms(VolatilityModelSpec::from_name("GARCH-J"));
  CHECK(gj[4].lo == 0.0);
  CHECK(gj[4].hi == doctest::Approx(0.1));
}

TEST_CASE("adaptive scale moves toward the acceptance target and freezes") {
  AdaptiveScale s(0.1);
  CHECK(s.scale() == doctest::Approx(0.1));
  for (int i = 0; i < 50; ++i) s.observe(true);
  CHECK(s.scale() > 0.1);  // all accepts push the step size up
  const double grown = s.scale();
  for (int i = 0; i < 200; ++i) s.observe(false);
  CHECK(s.scale() < grown);  // rejects pull it back down
  CHECK(s.acceptance_rate() == doctest::Approx(50.0 / 250.0));

  s.freeze();
  s.reset_counts();
  CHECK(s.acceptance_rate() == 0.0);
  const double frozen = s.scale();
  for (int i = 0; i < 100; ++i) s.observe(i % 2 == 0);
  CHECK(s.scale() == frozen);
  CHECK(s.acceptance_rate() == doctest::Approx(0.5));
}

TEST_CASE("gelman rubin matches a direct computation") {
  std::vector<Eigen::VectorXd> chains(3);
  Rng rng(77);
  for (auto& c : chains) {
    c.resize(8);
    for (int i = 0; i < 8; ++i) c(i) = rng.normal();
  }
  chains[2].array() += 0.8;  // separate one chain

  const int m = 3, n = 8;
  double grand = 0.0, w = 0.0, b = 0.0;
  std::vector<double> means(m);
  for (int j = 0; j < m; ++j) {
    means[j] = chains[j].mean();
    grand += means[j] / m;
    w += (chains[j].array() - means[j]).square().sum() / (n - 1) / m;
  }
  for (int j = 0; j < m; ++j) b += (means[j] - grand) * (means[j] - grand);
  b *= static_cast<double>(n) / (m - 1);
  const double expected = std::sqrt(((n - 1.0) / n * w + b / n) / w);

  CHECK(gelman_rubin(chains) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(gelman_rubin(chains) > 1.0);

  // identical chains sit just below 1 by the finite-sample correction
  std::vector<Eigen::VectorXd> same{chains[0], chains[0], chains[0]};
  CHECK(gelman_rubin(same) == doctest::Approx(std::sqrt(7.0 / 8.0)).epsilon(1e-12));

  CHECK_THROWS_AS(gelman_rubin({chains[0]}), Error);
  Eigen::VectorXd tiny(3);
  tiny << 1, 2, 3;
  CHECK_THROWS_AS(gelman_rubin({tiny, tiny}), Error);
}

TEST_CASE("random-walk sampler recovers a known two-block target") {
  // x0 ~ N(3, 2^2) on the identity scale, x1 ~ LogNormal(0.5, 0.3^2) so the
  // log_pos jacobian is exercised end to end
  auto log_target = [](const Eigen::VectorXd& x) {
    if (x(1) <= 0.0) return -std::numeric_limits<double>::infinity();
    const double d0 = (x(0) - 3.0) / 2.0;
    const double d1 = (std::log(x(1)) - 0.5) / 0.3;
    return -0.5 * d0 * d0 - 0.5 * d1 * d1 - std::log(x(1));
  };
  std::vector<Transform> tr{Transform::identity(), Transform::log_pos()};
  Eigen::VectorXd init(2);
  init << 0.0, 1.0;
  Rng rng(404);
  RwmResult r = adaptive_rwm(log_target, tr, init, 25000, 3000, rng);

  REQUIRE(r.draws.rows() == 25000);
  REQUIRE(r.draws.cols() == 2);
  const double m0 = r.draws.col(0).mean();
  const double m1 = r.draws.col(1).mean();
  const double sd0 = std::sqrt(
      (r.draws.col(0).array() - m0).square().sum() / (r.draws.rows() - 1));
  CHECK(m0 == doctest::Approx(3.0).epsilon(0.05));
  CHECK(sd0 == doctest::Approx(2.0).epsilon(0.08));
  CHECK(m1 == doctest::Approx(std::exp(0.5 + 0.045)).epsilon(0.04));
  CHECK(r.draws.col(1).minCoeff() > 0.0);

  REQUIRE(r.acceptance_rates.size() == 2);
  for (double a : r.acceptance_rates) {
    CHECK(a > 0.2);
    CHECK(a < 0.7);
  }

  Rng rng2(404);
  RwmResult again = adaptive_rwm(log_target, tr, init, 25000, 3000, rng2);
  CHECK((again.draws - r.draws).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampler rejects malformed setups") {
  auto flat = [](const Eigen::VectorXd&) { return 0.0; };
  std::vector<Transform> tr{Transform::identity()};
  Eigen::VectorXd bad_init(2);
  bad_init << 0.0, 0.0;
  Rng rng(1);
  CHECK_THROWS_AS(adaptive_rwm(flat, tr, bad_init, 10, 10, rng), Error);

  Eigen::VectorXd init(1);
  init << 0.0;
  CHECK_THROWS_AS(adaptive_rwm(flat, tr, init, 0, 10, rng), Error);

  auto never = [](const Eigen::VectorXd&) {
    return -std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(adaptive_rwm(never, tr, init, 10, 10, rng), Error);
}
