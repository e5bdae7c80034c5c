#include "qcv/model_comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/volatility/garch.hpp"
#include "qcv/volatility/sv.hpp"

namespace qcv::vol {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::uint64_t data_fingerprint(const Series& y) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (double v : y.values) mix(&v, sizeof(v));
  return h;
}

MarginalLikelihoodEstimate marginal_likelihood_is(const IsProblem& problem,
                                                  const Eigen::MatrixXd& posterior_draws,
                                                  int n_is_draws,
                                                  std::uint64_t seed) {
  const int d = static_cast<int>(problem.transforms.size());
  if (posterior_draws.cols() != d)
    throw Error(Errc::length_mismatch, "draw columns != transform count");
  if (posterior_draws.rows() < 2)
    throw Error(Errc::too_short, "need at least 2 posterior draws for moment matching");
  if (n_is_draws < 2)
    throw Error(Errc::invalid_argument, "need at least 2 importance draws");

  // Moment-matched independent Gaussian proposal on the unconstrained scale.
  const Eigen::Index m = posterior_draws.rows();
  Eigen::MatrixXd z(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j)
      z(i, j) = problem.transforms[j].to_unconstrained(posterior_draws(i, j));
  Eigen::VectorXd mean = z.colwise().mean();
  Eigen::VectorXd sd(d);
  for (int j = 0; j < d; ++j) {
    const double v = (z.col(j).array() - mean(j)).square().sum() / (m - 1);
    sd(j) = 1.1 * std::sqrt(std::max(v, 1e-12));
  }

  Rng rng(Rng::derive(seed, Rng::stream_of("marginal-likelihood")));
  std::vector<double> lw(static_cast<std::size_t>(n_is_draws));
  std::vector<double> inner_nse(static_cast<std::size_t>(n_is_draws), 0.0);
  Eigen::VectorXd zi(d), theta(d);
  for (int k = 0; k < n_is_draws; ++k) {
    double log_q = 0.0, log_jac = 0.0;
    for (int j = 0; j < d; ++j) {
      const double u = rng.normal();
      zi(j) = mean(j) + sd(j) * u;
      log_q += -0.5 * (kLog2Pi + u * u) - std::log(sd(j));
      theta(j) = problem.transforms[j].to_natural(zi(j));
      log_jac += problem.transforms[j].log_jacobian(zi(j));
    }
    const double lp = problem.log_prior(theta);
    if (!std::isfinite(lp)) {
      lw[static_cast<std::size_t>(k)] = kNegInf;
      continue;
    }
    const auto [ll, ll_nse] = problem.log_likelihood(theta);
    lw[static_cast<std::size_t>(k)] = ll + lp - log_q + log_jac;
    inner_nse[static_cast<std::size_t>(k)] = ll_nse;
  }

  const double mx = *std::max_element(lw.begin(), lw.end());
  if (!std::isfinite(mx))
    throw Error(Errc::degenerate_weights, "all importance weights vanished");
  double s1 = 0.0, s2 = 0.0, s_inner = 0.0;
  for (std::size_t k = 0; k < lw.size(); ++k) {
    if (lw[k] == kNegInf) continue;
    const double e = std::exp(lw[k] - mx);
    s1 += e;
    s2 += e * e;
    s_inner += e * e * inner_nse[k] * inner_nse[k];
  }
  const double n = static_cast<double>(n_is_draws);

  MarginalLikelihoodEstimate out;
  out.log_ml = mx + std::log(s1 / n);
  out.ess = s1 * s1 / s2;
  out.n_is_draws = n_is_draws;
  if (out.ess < 0.01 * n)
    throw Error(Errc::degenerate_weights,
                "importance-sampling ESS below 1% of draws");
  const double outer_rel = std::max(0.0, n * s2 / (s1 * s1) - 1.0) / n;
  const double inner_rel = s_inner / (s1 * s1);
  out.nse = std::sqrt(outer_rel + inner_rel);
  return out;
}

MarginalLikelihoodEstimate marginal_likelihood(const PosteriorDraws& fit,
                                               const Series& y, int n_is_draws,
                                               std::uint64_t seed,
                                               const PriorConfig& prior,
                                               int inner_draws) {
  if (fit.draws.rows() < 1000)
    throw Error(Errc::invalid_argument,
                "marginal likelihood needs >= 1000 post-burn-in draws");
  y.validate();
  const VolatilityModelSpec spec = fit.spec;
  const ModelPriors priors(spec, prior);

  IsProblem problem;
  problem.transforms = param_transforms(spec);
  const auto names = param_names(spec);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "kappa")
      problem.transforms[i] = Transform::logit(0.0, prior.kappa_max);
  problem.log_prior = [&priors](const Eigen::VectorXd& theta) {
    return priors.log_density(theta);
  };
  int counter = 0;
  if (spec.family == Family::garch) {
    problem.log_likelihood = [&spec, &y](const Eigen::VectorXd& theta) {
      return std::make_pair(garch_loglik(spec, unpack_garch(spec, theta), y), 0.0);
    };
  } else {
    problem.log_likelihood = [&spec, &y, seed, inner_draws,
                              &counter](const Eigen::VectorXd& theta) {
      const auto inner_seed = Rng::derive(seed, Rng::stream_of("nested-is") + counter++);
      const IntegratedLoglik il =
          sv_integrated_loglik(spec, unpack_sv(spec, theta), y, inner_draws, inner_seed);
      return std::make_pair(il.value, il.nse);
    };
  }

  MarginalLikelihoodEstimate out =
      marginal_likelihood_is(problem, fit.draws, n_is_draws, seed);
  out.spec = spec;
  out.data_hash = data_fingerprint(y);
  return out;
}

double bayes_factor(const MarginalLikelihoodEstimate& a,
                    const MarginalLikelihoodEstimate& b) {
  if (a.data_hash != b.data_hash)
    throw Error(Errc::data_mismatch,
                "Bayes factor requires estimates from the same data");
  return a.log_ml - b.log_ml;
}

std::vector<MarginalLikelihoodEstimate> ranking_table(
    std::vector<MarginalLikelihoodEstimate> estimates) {
  if (estimates.size() < 2)
    throw Error(Errc::invalid_argument, "ranking needs at least 2 estimates");
  std::stable_sort(estimates.begin(), estimates.end(),
                   [](const MarginalLikelihoodEstimate& a,
                      const MarginalLikelihoodEstimate& b) {
                     if (a.log_ml != b.log_ml) return a.log_ml > b.log_ml;
                     return a.spec.name() < b.spec.name();
                   });
  return estimates;
}

}  // namespace qcv::vol
