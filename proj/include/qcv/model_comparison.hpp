#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcv/series.hpp"
#include "qcv/volatility/mcmc.hpp"
#include "qcv/volatility/priors.hpp"
#include "qcv/volatility/spec.hpp"

namespace qcv::vol {

struct MarginalLikelihoodEstimate {
  VolatilityModelSpec spec;
  double log_ml = 0.0;
  double nse = 0.0;
  int n_is_draws = 0;
  double ess = 0.0;
  std::uint64_t data_hash = 0;  // identity of the underlying data
};

/// A marginal-likelihood problem in natural coordinates: likelihood callback
/// returning (log value, inner nse) so nested estimators can propagate their
/// error, a proper log prior (-inf outside support), and one transform per
/// coordinate onto the unconstrained proposal scale.
struct IsProblem {
  std::function<std::pair<double, double>(const Eigen::VectorXd&)> log_likelihood;
  std::function<double(const Eigen::VectorXd&)> log_prior;
  std::vector<Transform> transforms;
};

/// Importance-sampling estimate of log p(y) with a proposal fitted to
/// posterior draws: independent Gaussians on the unconstrained scale, moment
/// matched to the transformed draws (sd inflated 10% as a tail guard).
/// Weights are p(y|theta) p(theta) / q(theta); nse combines the outer weight
/// variance with first-order propagation of the inner likelihood nse.
/// Throws DegenerateWeights when ESS < 1% of draws.
MarginalLikelihoodEstimate marginal_likelihood_is(const IsProblem& problem,
                                                  const Eigen::MatrixXd& posterior_draws,
                                                  int n_is_draws,
                                                  std::uint64_t seed);

/// Marginal likelihood of a fitted volatility model: exact garch_loglik for
/// GARCH specs, nested importance sampling (sv_integrated_loglik with
/// inner_draws paths per evaluation) for SV specs. prior must match the fit.
MarginalLikelihoodEstimate marginal_likelihood(const PosteriorDraws& fit,
                                               const Series& y, int n_is_draws,
                                               std::uint64_t seed,
                                               const PriorConfig& prior = {},
                                               int inner_draws = 200);

/// log Bayes factor of a over b; both estimates must come from the same data.
double bayes_factor(const MarginalLikelihoodEstimate& a,
                    const MarginalLikelihoodEstimate& b);

/// Estimates sorted by log_ml descending, model-name ascending on ties.
std::vector<MarginalLikelihoodEstimate> ranking_table(
    std::vector<MarginalLikelihoodEstimate> estimates);

/// FNV-1a hash of the raw observation values, used to pin estimates to data.
std::uint64_t data_fingerprint(const Series& y);

}  // namespace qcv::vol
