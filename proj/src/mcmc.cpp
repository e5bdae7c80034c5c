#include "qcv/volatility/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcv/errors.hpp"

namespace qcv::vol {

double Transform::to_unconstrained(double x) const {
  switch (kind) {
    case Kind::identity: return x;
    case Kind::log_pos: return std::log(x);
    case Kind::logit: {
      const double u = (x - lo) / (hi - lo);
      return std::log(u / (1.0 - u));
    }
    case Kind::log_shift2: return std::log(x - 2.0);
  }
  return x;
}

double Transform::to_natural(double z) const {
  switch (kind) {
    case Kind::identity: return z;
    case Kind::log_pos: return std::exp(z);
    case Kind::logit: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return lo + (hi - lo) * s;
    }
    case Kind::log_shift2: return 2.0 + std::exp(z);
  }
  return z;
}

double Transform::log_jacobian(double z) const {
  switch (kind) {
    case Kind::identity: return 0.0;
    case Kind::log_pos: return z;
    case Kind::logit: {
      // d natural / d z = (hi-lo) s (1-s)
      const double s = 1.0 / (1.0 + std::exp(-z));
      return std::log(hi - lo) + std::log(s) + std::log1p(-s);
    }
    case Kind::log_shift2: return z;
  }
  return 0.0;
}

std::vector<Transform> param_transforms(const VolatilityModelSpec& spec) {
  std::vector<Transform> out;
  for (const auto& name : param_names(spec)) {
    if (name == "mu" || name == "mu_h" || name == "lambda" || name == "mu_j")
      out.push_back(Transform::identity());
    else if (name == "alpha0" || name == "alpha1" || name == "beta1" ||
             name == "beta2" || name == "gamma" || name == "sigma_h" ||
             name == "sigma_j")
      out.push_back(Transform::log_pos());
    else if (name == "phi" || name == "phi2" || name == "psi" || name == "rho")
      out.push_back(Transform::logit(-1.0, 1.0));
    else if (name == "nu")
      out.push_back(Transform::log_shift2());
    else if (name == "kappa")
      out.push_back(Transform::logit(0.0, 0.1));
    else
      throw Error(Errc::unknown_variable, "no transform for parameter " + name);
  }
  return out;
}

void AdaptiveScale::observe(bool accepted) {
  ++n_;
  if (accepted) ++acc_;
  if (frozen_) return;
  const double step = 1.0 / std::pow(static_cast<double>(n_) + 10.0, 0.6);
  log_s_ += step * ((accepted ? 1.0 : 0.0) - 0.44);
  log_s_ = std::clamp(log_s_, std::log(1e-5), std::log(50.0));
}

double gelman_rubin(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2)
    throw Error(Errc::invalid_argument, "Gelman-Rubin needs at least 2 chains");
  const int m = static_cast<int>(chains.size());
  int n = std::numeric_limits<int>::max();
  for (const auto& c : chains) n = std::min(n, static_cast<int>(c.size()));
  if (n < 4) throw Error(Errc::too_short, "chains too short for Gelman-Rubin");

  std::vector<double> means(m), vars(m);
  for (int j = 0; j < m; ++j) {
    const auto head = chains[j].head(n);
    means[j] = head.mean();
    vars[j] = (head.array() - means[j]).square().sum() / (n - 1);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= m;
  double b = 0.0;  // between-chain variance * n
  for (double v : means) b += (v - grand) * (v - grand);
  b *= static_cast<double>(n) / (m - 1);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= m;
  if (w <= 0.0) return 1.0;  // constant chains
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

RwmResult adaptive_rwm(const std::function<double(const Eigen::VectorXd&)>& log_target,
                       const std::vector<Transform>& transforms,
                       const Eigen::VectorXd& init_natural, int n_draws,
                       int n_burnin, Rng& rng) {
  const int d = static_cast<int>(transforms.size());
  if (init_natural.size() != d)
    throw Error(Errc::length_mismatch, "init length != transform count");
  if (n_draws < 1) throw Error(Errc::invalid_argument, "n_draws must be >= 1");

  Eigen::VectorXd z(d), x(d);
  for (int i = 0; i < d; ++i) z(i) = transforms[i].to_unconstrained(init_natural(i));
  auto natural = [&](const Eigen::VectorXd& zz) {
    Eigen::VectorXd xx(d);
    for (int i = 0; i < d; ++i) xx(i) = transforms[i].to_natural(zz(i));
    return xx;
  };
  auto log_post_z = [&](const Eigen::VectorXd& zz) {
    double lp = log_target(natural(zz));
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) lp += transforms[i].log_jacobian(zz(i));
    return lp;
  };

  double lp = log_post_z(z);
  if (!std::isfinite(lp))
    throw Error(Errc::invalid_params, "initial point has zero posterior density");

  std::vector<AdaptiveScale> scales(d, AdaptiveScale(0.1));
  RwmResult out;
  out.draws.resize(n_draws, d);

  const int total = n_burnin + n_draws;
  for (int it = 0; it < total; ++it) {
    if (it == n_burnin)
      for (auto& s : scales) {
        s.freeze();
        s.reset_counts();
      }
    for (int i = 0; i < d; ++i) {
      const double z_old = z(i);
      z(i) = z_old + scales[i].scale() * rng.normal();
      const double lp_new = log_post_z(z);
      const bool accept = std::log(rng.uniform()) < lp_new - lp;
      if (accept)
        lp = lp_new;
      else
        z(i) = z_old;
      scales[i].observe(accept);
    }
    if (it >= n_burnin) out.draws.row(it - n_burnin) = natural(z).transpose();
  }

  out.acceptance_rates.reserve(d);
  for (const auto& s : scales) out.acceptance_rates.push_back(s.acceptance_rate());
  for (double a : out.acceptance_rates)
    if (a < 0.01)
      throw Error(Errc::chain_divergence,
                  "random-walk acceptance below 1% after adaptation");
  return out;
}

}  // namespace qcv::vol
