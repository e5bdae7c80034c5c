#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "qcv/volatility/mcmc.hpp"
#include "qcv/volatility/priors.hpp"
#include "qcv/volatility/spec.hpp"

using namespace qcv::vol;

namespace {
VolatilityModelSpec by_name(const std::string& n) {
  return VolatilityModelSpec::from_name(n);
}
}  // namespace

TEST_CASE("scalar log densities match scipy") {
  CHECK(log_normal_density(1.3, 0.2, 2.5) ==
        doctest::Approx(-1.6190838991417502).epsilon(1e-13));
  CHECK(log_half_normal_density(0.7, 1.5) ==
        doctest::Approx(-0.7401453496417807).epsilon(1e-13));
  CHECK(log_inv_gamma_density(0.8, 2.5, 0.25) ==
        doctest::Approx(-3.2819163436729113).epsilon(1e-13));
  CHECK(log_half_normal_density(0.0, 1.5) ==
        -std::numeric_limits<double>::infinity());
  CHECK(log_inv_gamma_density(-0.5, 2.5, 0.25) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("stationarity-region mass matches adaptive quadrature") {
  // scipy.integrate.quad references at the default var_sd = 10
  CHECK(std::exp(ModelPriors(by_name("GARCH")).log_truncation_normalizer()) ==
        doctest::Approx(0.003177799880747335).epsilon(1e-6));
  CHECK(std::exp(ModelPriors(by_name("GARCH-2")).log_truncation_normalizer()) ==
        doctest::Approx(8.453131482451578e-05).epsilon(1e-6));
  CHECK(std::exp(ModelPriors(by_name("GARCH-GJR")).log_truncation_normalizer()) ==
        doctest::Approx(0.00016880968014856422).epsilon(1e-6));
  CHECK(ModelPriors(by_name("SV")).log_truncation_normalizer() == 0.0);
  CHECK(ModelPriors(by_name("SV-MA")).log_truncation_normalizer() == 0.0);
}

TEST_CASE("garch joint prior decomposes into its factors") {
  PriorConfig cfg;
  ModelPriors plain(by_name("GARCH"), cfg);
  GarchParams p;
  p.mu = 0.3;
  p.alpha0 = 0.2;
  p.alpha1 = 0.08;
  p.beta1 = 0.85;
  const double expected = log_normal_density(p.mu, 0.0, cfg.mean_var) +
                          log_half_normal_density(p.alpha0, cfg.var_sd) +
                          log_half_normal_density(p.alpha1, cfg.var_sd) +
                          log_half_normal_density(p.beta1, cfg.var_sd) -
                          plain.log_truncation_normalizer();
  CHECK(plain.log_density(p) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(plain.log_density(pack_params(plain.spec(), p)) ==
        doctest::Approx(expected).epsilon(1e-13));

  GarchParams unstable = p;
  unstable.beta1 = 0.95;  // alpha1 + beta1 >= 1
  CHECK(plain.log_density(unstable) == -std::numeric_limits<double>::infinity());

  // nu - 2 ~ gamma(2, 5): scipy gamma.logpdf(6, 2, scale=5)
  GarchParams pt = p;
  pt.nu = 8.0;
  ModelPriors tfit(by_name("GARCH-t"), cfg);
  CHECK(tfit.log_density(pt) - plain.log_density(p) ==
        doctest::Approx(-2.627116355640146).epsilon(1e-12));

  // MA coefficient is uniform on (-1, 1)
  GarchParams pma = p;
  pma.psi = 0.4;
  ModelPriors mafit(by_name("GARCH-MA"), cfg);
  CHECK(mafit.log_density(pma) - plain.log_density(p) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-13));

  // jump block: uniform kappa below the ceiling, normal times half-normal
  GarchParams pj = p;
  pj.kappa = 0.05;
  pj.mu_j = -1.0;
  pj.sigma_j = 2.0;
  ModelPriors jfit(by_name("GARCH-J"), cfg);
  const double jump_terms = -std::log(cfg.kappa_max) +
                            log_normal_density(-1.0, 0.0, cfg.mean_var) +
                            log_half_normal_density(2.0, cfg.var_sd);
  CHECK(jfit.log_density(pj) - plain.log_density(p) ==
        doctest::Approx(jump_terms).epsilon(1e-12));
  GarchParams over = pj;
  over.kappa = 0.2;  // above the ceiling but still a valid model point
  CHECK(jfit.log_density(over) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("sv joint prior uses the documented marginals") {
  PriorConfig cfg;
  ModelPriors plain(by_name("SV"), cfg);
  SvParams p;
  p.mu = 0.1;
  p.mu_h = -0.4;
  p.phi = 0.9;
  p.sigma_h = 0.2;
  // frozen scipy pieces: beta((phi+1)/2; 20, 1.5)/2 and the sigma_h^2
  // inverse-gamma with its change of variables
  const double expected = log_normal_density(0.1, 0.0, cfg.mean_var) +
                          log_normal_density(-0.4, 0.0, cfg.mu_h_var) +
                          1.4672380004105108 + 0.3493558818919017;
  CHECK(plain.log_density(p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(plain.log_density(pack_params(plain.spec(), p)) ==
        doctest::Approx(expected).epsilon(1e-12));

  SvParams bad = p;
  bad.phi = 1.2;
  CHECK(plain.log_density(bad) == -std::numeric_limits<double>::infinity());
  bad = p;
  bad.sigma_h = 0.0;
  CHECK(plain.log_density(bad) == -std::numeric_limits<double>::infinity());

  // leverage adds a uniform(-1,1) correlation
  SvParams pl = p;
  pl.rho = -0.6;
  ModelPriors lev(by_name("SV-L"), cfg);
  CHECK(lev.log_density(pl) - plain.log_density(p) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-13));

  // the AR(2) state prior is uniform over the stationarity triangle
  ModelPriors two(by_name("SV-2"), cfg);
  SvParams p2 = p;
  p2.phi = 0.5;
  p2.phi2 = 0.2;
  const double base = log_normal_density(0.1, 0.0, cfg.mean_var) +
                      log_normal_density(-0.4, 0.0, cfg.mu_h_var) +
                      std::log(0.25) + 0.3493558818919017;
  CHECK(two.log_density(p2) == doctest::Approx(base).epsilon(1e-12));
  p2.phi2 = 0.6;  // phi + phi2 >= 1
  CHECK(two.log_density(p2) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("model spec naming round trips") {
  auto all = VolatilityModelSpec::all_models();
  CHECK(all.size() == 14);
  for (const auto& spec : all) {
    VolatilityModelSpec back = VolatilityModelSpec::from_name(spec.name());
    CHECK(back.family == spec.family);
    CHECK(back.variance_lags == spec.variance_lags);
    CHECK(back.features == spec.features);
    CHECK(param_names(spec).size() == param_transforms(spec).size());
  }
  CHECK(by_name("GARCH-GJR").has(Feature::leverage));
  CHECK(by_name("SV-L").has(Feature::leverage));
  CHECK_THROWS(VolatilityModelSpec::from_name("EGARCH"));
}

TEST_CASE("unconditional variance follows the persistence formula") {
  GarchParams p;
  p.alpha0 = 0.3;
  p.alpha1 = 0.1;
  p.beta1 = 0.6;
  p.gamma = 0.2;
  CHECK(p.unconditional_variance() == doctest::Approx(0.3 / (1.0 - 0.8)));
}
