#pragma once

#include <Eigen/Dense>

#include "qcv/volatility/spec.hpp"

namespace qcv::vol {

/// Prior hyperparameters, one place for every model. Defaults are weakly
/// informative:
///   mean parameters (mu, lambda, mu_j)      normal(0, mean_var)
///   GARCH variance block (alpha1, beta1,
///     beta2 or gamma)                       half-normal(var_sd), jointly
///                                           truncated to the stationarity
///                                           region
///   alpha0, sigma_j                         half-normal(var_sd)
///   nu - 2                                  gamma(nu_shape, nu_scale)
///   kappa                                   uniform(0, kappa_max)
///   psi, rho                                uniform(-1, 1)
///   mu_h                                    normal(0, mu_h_var)
///   (phi + 1) / 2                           beta(phi_beta_a, phi_beta_b)
///   (phi, phi2) for the AR(2) state        uniform on the stationarity
///                                           triangle
///   sigma_h^2                               inv-gamma(sigma_h2_shape,
///                                           sigma_h2_scale)
struct PriorConfig {
  double mean_var = 100.0;
  double var_sd = 10.0;
  double nu_shape = 2.0;
  double nu_scale = 5.0;
  double kappa_max = 0.1;
  double mu_h_var = 10.0;
  double phi_beta_a = 20.0;
  double phi_beta_b = 1.5;
  double sigma_h2_shape = 2.5;
  double sigma_h2_scale = 0.25;
};

/// Joint prior for one model spec. The truncation normalizer of the GARCH
/// variance block is integrated once at construction (nested Simpson over
/// the stationarity region, innermost dimension in closed form).
class ModelPriors {
 public:
  ModelPriors(const VolatilityModelSpec& spec, const PriorConfig& cfg = {});

  /// Log prior density at a natural-scale parameter vector packed in
  /// param_names(spec) order; -inf outside the support.
  double log_density(const Eigen::VectorXd& packed) const;
  double log_density(const GarchParams& p) const;
  double log_density(const SvParams& p) const;

  const PriorConfig& config() const { return cfg_; }
  const VolatilityModelSpec& spec() const { return spec_; }
  /// Log of the stationarity-region mass of the untruncated half-normal
  /// variance block (0 for SV specs, which have no such block).
  double log_truncation_normalizer() const { return log_z_; }

 private:
  VolatilityModelSpec spec_;
  PriorConfig cfg_;
  double log_z_ = 0.0;
};

/// Common scalar log densities shared by the priors and the Gibbs steps.
double log_normal_density(double x, double mean, double var);
double log_half_normal_density(double x, double sd);
double log_inv_gamma_density(double x, double shape, double scale);

}  // namespace qcv::vol
