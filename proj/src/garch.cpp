#include "qcv/volatility/garch.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/volatility/mcmc.hpp"

namespace qcv::vol {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
const double kLogFloor = std::log(DBL_MIN);

void check_family(const VolatilityModelSpec& spec) {
  spec.validate();
  if (spec.family != Family::garch)
    throw Error(Errc::invalid_argument, "expected a GARCH-family spec");
}

double norm_logpdf(double resid, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + resid * resid / var);
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct Recursion {
  const VolatilityModelSpec& spec;
  const GarchParams& p;
  double sig2_lag1, sig2_lag2, eps_prev = 0.0;

  Recursion(const VolatilityModelSpec& s, const GarchParams& pp)
      : spec(s), p(pp) {
    sig2_lag1 = sig2_lag2 = pp.unconditional_variance();
  }

  double variance(int t) const {
    if (t == 0) return p.unconditional_variance();
    double s2 = p.alpha0 + p.alpha1 * eps_prev * eps_prev + p.beta1 * sig2_lag1;
    if (spec.variance_lags == 2) s2 += p.beta2 * sig2_lag2;
    if (spec.has(Feature::leverage) && eps_prev < 0.0)
      s2 += p.gamma * eps_prev * eps_prev;
    return s2;
  }

  double mean(double sig2) const {
    double m = p.mu;
    if (spec.has(Feature::in_mean)) m += p.lambda * sig2;
    if (spec.has(Feature::ma1)) m += p.psi * eps_prev;
    return m;
  }

  void advance(double sig2, double eps) {
    sig2_lag2 = sig2_lag1;
    sig2_lag1 = sig2;
    eps_prev = eps;
  }
};

}  // namespace

double garch_loglik(const VolatilityModelSpec& spec, const GarchParams& p,
                    const std::vector<double>& y, bool* underflow) {
  check_family(spec);
  validate_params(spec, p);
  if (y.empty()) throw Error(Errc::too_short, "loglik needs at least 1 obs");

  Recursion rec(spec, p);
  double ll = 0.0;
  bool floored = false;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double sig2 = rec.variance(static_cast<int>(t));
    if (!(sig2 > 0.0) || !std::isfinite(sig2))
      throw Error(Errc::numeric_failure, "variance recursion left (0, inf)");
    const double m = rec.mean(sig2);
    const double resid = y[t] - m;
    double lt;
    if (spec.has(Feature::jump)) {
      lt = log_sum_exp(
          std::log1p(-p.kappa) + norm_logpdf(resid, sig2),
          std::log(p.kappa) + norm_logpdf(resid - p.mu_j, sig2 + p.sigma_j * p.sigma_j));
    } else if (spec.has(Feature::student_t)) {
      lt = stats::student_t_std_logpdf(resid, sig2, p.nu);
    } else {
      lt = norm_logpdf(resid, sig2);
    }
    if (lt < kLogFloor) {
      lt = kLogFloor;
      floored = true;
    }
    ll += lt;
    rec.advance(sig2, resid);
  }
  if (underflow) *underflow = floored;
  return ll;
}

double garch_loglik(const VolatilityModelSpec& spec, const GarchParams& p,
                    const Series& y, bool* underflow) {
  return garch_loglik(spec, p, y.values, underflow);
}

std::vector<double> garch_variance_path(const VolatilityModelSpec& spec,
                                        const GarchParams& p,
                                        const std::vector<double>& y) {
  check_family(spec);
  validate_params(spec, p);
  Recursion rec(spec, p);
  std::vector<double> out(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double sig2 = rec.variance(static_cast<int>(t));
    out[t] = sig2;
    rec.advance(sig2, y[t] - rec.mean(sig2));
  }
  return out;
}

PosteriorDraws fit_garch_bayes(const VolatilityModelSpec& spec, const Series& y,
                               const PriorConfig& prior, const McmcConfig& mcmc) {
  check_family(spec);
  y.validate();
  if (y.size() < 100)
    throw Error(Errc::too_short, "GARCH estimation needs T >= 100");
  if (mcmc.n_draws < 1000)
    throw Error(Errc::invalid_argument, "need n_draws >= 1000 after burn-in");
  const double samp_var = stats::sample_variance(y.values);
  if (!(samp_var > 0.0))
    throw Error(Errc::chain_divergence, "constant series has no volatility scale");

  const ModelPriors priors(spec, prior);
  auto transforms = param_transforms(spec);
  const auto names = param_names(spec);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "kappa") transforms[i] = Transform::logit(0.0, prior.kappa_max);

  GarchParams init;
  init.mu = stats::mean(y.values);
  init.alpha1 = 0.05;
  init.beta1 = spec.variance_lags == 2 ? 0.6 : 0.8;
  init.beta2 = spec.variance_lags == 2 ? 0.2 : 0.0;
  init.gamma = spec.has(Feature::leverage) ? 0.05 : 0.0;
  const double persist = init.alpha1 + init.beta1 + init.beta2 + 0.5 * init.gamma;
  init.alpha0 = samp_var * (1.0 - persist);
  init.kappa = spec.has(Feature::jump) ? 0.5 * prior.kappa_max : 0.0;
  init.sigma_j = std::sqrt(samp_var);
  const Eigen::VectorXd init_packed = pack_params(spec, init);

  auto log_target = [&](const Eigen::VectorXd& packed) {
    const GarchParams cand = unpack_garch(spec, packed);
    const double lp = priors.log_density(cand);
    if (!std::isfinite(lp)) return lp;
    return lp + garch_loglik(spec, cand, y.values);
  };

  const int d = static_cast<int>(names.size());
  PosteriorDraws out;
  out.spec = spec;
  out.param_names = names;
  out.seed = mcmc.seed;
  out.timestamps = y.timestamps;
  out.draws.resize(static_cast<Eigen::Index>(mcmc.n_draws) * mcmc.n_chains, d);
  out.acceptance_rates.assign(d, 0.0);

  for (int c = 0; c < mcmc.n_chains; ++c) {
    Rng rng(Rng::derive(mcmc.seed, Rng::stream_of("garch-chain") + c));
    RwmResult res = adaptive_rwm(log_target, transforms, init_packed,
                                 mcmc.n_draws, mcmc.n_burnin, rng);
    out.draws.middleRows(static_cast<Eigen::Index>(c) * mcmc.n_draws,
                         mcmc.n_draws) = res.draws;
    for (int i = 0; i < d; ++i)
      out.acceptance_rates[i] += res.acceptance_rates[i] / mcmc.n_chains;
  }

  // Posterior mean conditional sd path from thinned draws.
  const Eigen::Index total = out.draws.rows();
  const Eigen::Index step = std::max<Eigen::Index>(1, total / 200);
  Eigen::VectorXd vol = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(y.size()));
  Eigen::Index used = 0;
  for (Eigen::Index r = 0; r < total; r += step, ++used) {
    const auto path = garch_variance_path(
        spec, unpack_garch(spec, out.draws.row(r).transpose()), y.values);
    for (std::size_t t = 0; t < path.size(); ++t)
      vol(static_cast<Eigen::Index>(t)) += std::sqrt(path[t]);
  }
  out.volatility_mean = vol / static_cast<double>(used);
  return out;
}

Series simulate_garch(const VolatilityModelSpec& spec, const GarchParams& p,
                      int t_len, std::uint64_t seed) {
  check_family(spec);
  validate_params(spec, p);
  if (t_len < 1) throw Error(Errc::invalid_argument, "t_len must be >= 1");

  constexpr int kBurn = 200;
  Rng shocks(Rng::derive(seed, Rng::stream_of("garch-sim")));
  Rng jump_arrival(Rng::derive(seed, Rng::stream_of("jump-arrival")));
  Rng jump_size(Rng::derive(seed, Rng::stream_of("jump-size")));
  Rng t_mixture(Rng::derive(seed, Rng::stream_of("t-mixture")));

  Recursion rec(spec, p);
  std::vector<double> out;
  out.reserve(t_len);
  for (int t = 0; t < kBurn + t_len; ++t) {
    const double sig2 = rec.variance(t);
    const double m = rec.mean(sig2);
    double eps;
    if (spec.has(Feature::student_t)) {
      const double w = t_mixture.gamma(0.5 * p.nu, 2.0);  // chi-square(nu)
      eps = std::sqrt(sig2) * shocks.normal() * std::sqrt((p.nu - 2.0) / w);
    } else {
      eps = std::sqrt(sig2) * shocks.normal();
    }
    double jump = 0.0;
    if (spec.has(Feature::jump) && jump_arrival.uniform() < p.kappa)
      jump = p.mu_j + p.sigma_j * jump_size.normal();
    if (t >= kBurn) out.push_back(m + eps + jump);
    rec.advance(sig2, eps + jump);
  }
  return Series::from_values(spec.name() + "_sim", std::move(out));
}

}  // namespace qcv::vol
