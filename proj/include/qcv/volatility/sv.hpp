#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcv/series.hpp"
#include "qcv/volatility/priors.hpp"
#include "qcv/volatility/spec.hpp"

namespace qcv::vol {

/// One latent log-variance path and the joint log density
/// log p(y | h, theta) + log p(h | theta) at that path (both terms fully
/// normalized).
struct LatentPath {
  Eigen::VectorXd h;
  double loglik_at_path = 0.0;
  bool accepted = false;
};

/// Feature augmentation carried by the Gibbs sampler: per-observation jump
/// indicators (SV-J) and Student-t scale mixing variables (SV-t). Empty
/// vectors mean the feature is integrated out analytically (two-component
/// mixture / standardized-t observation density).
struct SvAux {
  std::vector<int> jump;
  std::vector<double> t_scale;
};

/// One joint draw of h | y, theta (and aux, when supplied): Newton mode
/// finding on the conditional posterior, Gaussian proposal built from the
/// banded precision (state prior bandwidth <= 2 plus the observation
/// curvature), independence Metropolis-Hastings accept/reject.
LatentPath sample_states(const VolatilityModelSpec& spec, const SvParams& p,
                         const Series& y, const Eigen::VectorXd& current_h,
                         std::uint64_t seed, const SvAux& aux = {});

/// Gibbs sampler alternating the state draw with parameter blocks:
/// conjugate normal / inverse-gamma steps for mu (jointly with lambda or
/// mu_j where those enter the mean), mu_h and sigma_h; adaptive single-site
/// random-walk Metropolis for phi, phi2, psi, nu, rho, kappa, sigma_j (and
/// for mu_h, sigma_h under leverage, where the observation density depends
/// on them). acceptance_rates lists one entry per parameter (1.0 for
/// conjugate blocks) plus a final entry for the state path MH rate.
/// state_paths keeps every 10th post-burn-in path; volatility_mean is the
/// running posterior mean of exp(h_t / 2).
PosteriorDraws fit_sv_bayes(const VolatilityModelSpec& spec, const Series& y,
                            const PriorConfig& prior = {},
                            const McmcConfig& mcmc = {});

struct IntegratedLoglik {
  double value = 0.0;
  double nse = 0.0;
  double ess = 0.0;
  int n_draws = 0;
};

/// Importance-sampling estimate of log p(y | theta) with the latent path
/// integrated out, proposing from the same Gaussian approximation used in
/// sample_states. nse is the delta-method standard error of the log
/// estimate; throws DegenerateWeights when ESS < 1% of draws.
IntegratedLoglik sv_integrated_loglik(const VolatilityModelSpec& spec,
                                      const SvParams& p, const Series& y,
                                      int n_is_draws, std::uint64_t seed);

/// Exact forward simulation. The stationary state distribution seeds h, so
/// no burn-in is needed; feature draws use their own derived streams so a
/// feature toggled off reproduces the baseline path bit for bit.
Series simulate_sv(const VolatilityModelSpec& spec, const SvParams& p,
                   int t_len, std::uint64_t seed);

/// Posterior mean volatility path (sd scale) stored by a fit.
Series extract_volatility(const PosteriorDraws& fit);

}  // namespace qcv::vol
