#pragma once

#include <cstdint>
#include <vector>

#include "qcv/series.hpp"
#include "qcv/volatility/priors.hpp"
#include "qcv/volatility/spec.hpp"

namespace qcv::vol {

/// Exact log-likelihood of a GARCH-family spec. Variance recursion
/// sigma^2_t = alpha0 + alpha1 eps^2_{t-1} + beta1 sigma^2_{t-1}
/// (+ beta2 sigma^2_{t-2}) (+ gamma 1{eps_{t-1}<0} eps^2_{t-1}), initialized
/// at the unconditional variance. Mean equation y_t = mu (+ lambda sigma^2_t)
/// (+ psi eps_{t-1}); innovations normal or standardized Student-t; the jump
/// variant marginalizes a Bernoulli(kappa) normal(mu_j, sigma_j^2) jump into
/// a two-component mixture per observation and feeds y - mu to the recursion.
/// Per-observation log densities are floored at log(DBL_MIN); if the floor
/// binds, *underflow is set when provided.
double garch_loglik(const VolatilityModelSpec& spec, const GarchParams& p,
                    const Series& y, bool* underflow = nullptr);
double garch_loglik(const VolatilityModelSpec& spec, const GarchParams& p,
                    const std::vector<double>& y, bool* underflow = nullptr);

/// Conditional variance path implied by params along an observed series
/// (same recursion and conventions as garch_loglik).
std::vector<double> garch_variance_path(const VolatilityModelSpec& spec,
                                        const GarchParams& p,
                                        const std::vector<double>& y);

/// Adaptive single-site random-walk Metropolis over the transformed
/// parameter space. Each chain contributes mcmc.n_draws retained draws after
/// mcmc.n_burnin burn-in sweeps (chains are stacked row-wise); proposal
/// scales adapt toward 0.44 acceptance during burn-in and freeze after.
/// volatility_mean holds the posterior mean conditional sd path from thinned
/// draws. Deterministic given mcmc.seed.
PosteriorDraws fit_garch_bayes(const VolatilityModelSpec& spec, const Series& y,
                               const PriorConfig& prior = {},
                               const McmcConfig& mcmc = {});

/// Forward simulation of the spec's recursion, discarding a 200-step
/// burn-in. Feature-specific draws (jump arrivals, jump sizes, t mixing
/// variables) come from their own derived streams so a feature toggled off
/// reproduces the baseline path bit for bit at the same seed.
Series simulate_garch(const VolatilityModelSpec& spec, const GarchParams& p,
                      int t_len, std::uint64_t seed);

}  // namespace qcv::vol
