#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcv/series.hpp"

namespace qcv::vol {

enum class Family { garch, sv };
enum class Feature { jump, in_mean, ma1, student_t, leverage };

/// One of the 14 named models: a family, 1 or 2 variance lags, and at most
/// one feature toggled off the baseline. Leverage means the GJR form under
/// GARCH and correlated innovations under SV.
struct VolatilityModelSpec {
  Family family = Family::garch;
  int variance_lags = 1;
  std::set<Feature> features;

  void validate() const;
  bool has(Feature f) const { return features.count(f) > 0; }
  std::string name() const;
  static VolatilityModelSpec from_name(const std::string& name);
  /// The full Table-1 menu: 7 GARCH + 7 SV variants.
  static std::vector<VolatilityModelSpec> all_models();
};

struct GarchParams {
  double mu = 0.0;
  double alpha0 = 0.1;
  double alpha1 = 0.05;
  double beta1 = 0.85;
  double beta2 = 0.0;    // second variance lag (GARCH-2)
  double gamma = 0.0;    // GJR leverage loading
  double lambda = 0.0;   // in-mean loading on sigma^2_t
  double psi = 0.0;      // MA(1)
  double nu = 10.0;      // Student-t dof
  double kappa = 0.0;    // jump intensity
  double mu_j = 0.0;     // jump mean
  double sigma_j = 1.0;  // jump size sd

  /// Unconditional innovation variance implied by the recursion.
  double unconditional_variance() const;
};

struct SvParams {
  double mu = 0.0;
  double mu_h = 0.0;     // log-variance level
  double phi = 0.95;
  double phi2 = 0.0;     // second state lag (SV-2)
  double sigma_h = 0.2;  // state innovation sd
  double lambda = 0.0;   // in-mean loading on h_t
  double psi = 0.0;      // MA(1)
  double nu = 10.0;      // Student-t dof
  double rho = 0.0;      // leverage correlation corr(eps_t, eta_{t+1})
  double kappa = 0.0;    // jump intensity
  double mu_j = 0.0;
  double sigma_j = 1.0;
};

/// Throws InvalidParams when the parameter point violates positivity or
/// stationarity for the given spec.
void validate_params(const VolatilityModelSpec& spec, const GarchParams& p);
void validate_params(const VolatilityModelSpec& spec, const SvParams& p);
bool params_valid(const VolatilityModelSpec& spec, const GarchParams& p);
bool params_valid(const VolatilityModelSpec& spec, const SvParams& p);

/// Monotone map between the spec's parameter structs and the flat vector
/// order used by samplers, priors and draw storage.
std::vector<std::string> param_names(const VolatilityModelSpec& spec);
Eigen::VectorXd pack_params(const VolatilityModelSpec& spec, const GarchParams& p);
Eigen::VectorXd pack_params(const VolatilityModelSpec& spec, const SvParams& p);
GarchParams unpack_garch(const VolatilityModelSpec& spec, const Eigen::VectorXd& v);
SvParams unpack_sv(const VolatilityModelSpec& spec, const Eigen::VectorXd& v);

struct McmcConfig {
  int n_draws = 5000;
  int n_burnin = 2500;
  int n_chains = 1;
  std::uint64_t seed = 1;
};

struct PosteriorDraws {
  VolatilityModelSpec spec;
  std::vector<std::string> param_names;
  Eigen::MatrixXd draws;  // n_draws x n_params, natural scale, post burn-in
  std::vector<double> acceptance_rates;  // per parameter block
  std::uint64_t seed = 0;
  // SV only: thinned latent log-variance paths (every 10th kept) and the
  // running posterior mean of exp(h_t/2) over all post-burn-in sweeps.
  std::vector<Eigen::VectorXd> state_paths;
  Eigen::VectorXd volatility_mean;
  std::vector<Period> timestamps;

  Eigen::VectorXd posterior_mean() const;
  Eigen::VectorXd posterior_sd() const;
};

}  // namespace qcv::vol
