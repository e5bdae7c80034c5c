#include "qcv/volatility/sv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/banded.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/volatility/mcmc.hpp"

namespace qcv::vol {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCurvFloor = 1e-10;

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double norm_logpdf(double resid, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + resid * resid / var);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

void check_family(const VolatilityModelSpec& spec) {
  spec.validate();
  if (spec.family != Family::sv)
    throw Error(Errc::invalid_argument, "expected an SV-family spec");
}

// AR(1)/AR(2) stationary autocovariances at unit innovation variance.
void ar2_unit_gammas(double phi1, double phi2, double& g0, double& g1) {
  g0 = (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1));
  g1 = phi1 * g0 / (1.0 - phi2);
}

/// Prior on x = h - mu_h as a banded precision Q (bandwidth = AR order)
/// plus the normalizing constant 0.5 log det Q - T/2 log 2pi.
struct StatePrior {
  BandedSpd q;
  double log_norm = 0.0;
  double mu_h = 0.0;
  StatePrior(std::size_t n, std::size_t w) : q(n, w) {}
};

StatePrior state_prior(const VolatilityModelSpec& spec, const SvParams& p,
                       std::size_t t_len) {
  const double is2 = 1.0 / (p.sigma_h * p.sigma_h);
  const std::size_t order = spec.variance_lags == 2 ? 2 : 1;
  StatePrior sp(t_len, order);
  sp.mu_h = p.mu_h;
  if (order == 1) {
    sp.q.add(0, 0, (1.0 - p.phi * p.phi) * is2);
    for (std::size_t t = 1; t < t_len; ++t) {
      sp.q.add(t, t, is2);
      sp.q.add(t - 1, t - 1, p.phi * p.phi * is2);
      sp.q.add(t, t - 1, -p.phi * is2);
    }
  } else {
    double g0, g1;
    ar2_unit_gammas(p.phi, p.phi2, g0, g1);
    if (t_len == 1) {
      sp.q.add(0, 0, is2 / g0);
    } else {
      const double det = g0 * g0 - g1 * g1;
      sp.q.add(0, 0, g0 / det * is2);
      sp.q.add(1, 1, g0 / det * is2);
      sp.q.add(0, 1, -g1 / det * is2);
      for (std::size_t t = 2; t < t_len; ++t) {
        sp.q.add(t, t, is2);
        sp.q.add(t - 1, t - 1, p.phi * p.phi * is2);
        sp.q.add(t - 2, t - 2, p.phi2 * p.phi2 * is2);
        sp.q.add(t, t - 1, -p.phi * is2);
        sp.q.add(t, t - 2, -p.phi2 * is2);
        sp.q.add(t - 1, t - 2, p.phi * p.phi2 * is2);
      }
    }
  }
  BandedSpd copy = sp.q;
  if (!copy.factor())
    throw Error(Errc::numeric_failure, "state prior precision not positive definite");
  sp.log_norm = 0.5 * copy.logdet() - 0.5 * static_cast<double>(t_len) * kLog2Pi;
  return sp;
}

double quad_form(const BandedSpd& q, const std::vector<double>& x) {
  const auto qx = q.multiply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * qx[i];
  return s;
}

enum class ObsKind { plain, in_mean, t_marginal, t_aug, jump_marginal, jump_aug, leverage };

/// Observation log density p(y | h, theta, aux) with gradient and a positive
/// curvature surrogate for -d2/dh2 (exact where concave, Gauss-Newton
/// expected information elsewhere). The MA(1) variant pre-filters the
/// residuals, which do not depend on h.
class Obs {
 public:
  Obs(const VolatilityModelSpec& spec, const SvParams& p,
      const std::vector<double>& y, const SvAux& aux)
      : p_(p), n_(y.size()) {
    if (spec.has(Feature::leverage))
      kind_ = ObsKind::leverage;
    else if (spec.has(Feature::in_mean))
      kind_ = ObsKind::in_mean;
    else if (spec.has(Feature::student_t))
      kind_ = aux.t_scale.empty() ? ObsKind::t_marginal : ObsKind::t_aug;
    else if (spec.has(Feature::jump))
      kind_ = aux.jump.empty() ? ObsKind::jump_marginal : ObsKind::jump_aug;
    else
      kind_ = ObsKind::plain;

    r_.resize(n_);
    if (spec.has(Feature::ma1)) {
      double prev = 0.0;
      for (std::size_t t = 0; t < n_; ++t) {
        r_[t] = y[t] - p.mu - p.psi * prev;
        prev = r_[t];
      }
    } else {
      for (std::size_t t = 0; t < n_; ++t) r_[t] = y[t] - p.mu;
    }
    if (kind_ == ObsKind::t_aug) {
      if (aux.t_scale.size() != n_)
        throw Error(Errc::length_mismatch, "t_scale length != data length");
      lam_ = aux.t_scale;
    }
    if (kind_ == ObsKind::jump_aug) {
      if (aux.jump.size() != n_)
        throw Error(Errc::length_mismatch, "jump indicator length != data length");
      del_ = aux.jump;
    }
  }

  bool coupled() const { return kind_ == ObsKind::leverage; }

  double loglik(const Eigen::VectorXd& h) const {
    double ll = 0.0;
    const double s = p_.sigma_j * p_.sigma_j;
    const double cc = (p_.nu - 2.0) / p_.nu;
    switch (kind_) {
      case ObsKind::plain:
        for (std::size_t t = 0; t < n_; ++t)
          ll += -0.5 * (kLog2Pi + h(t) + r_[t] * r_[t] * std::exp(-h(t)));
        break;
      case ObsKind::in_mean:
        for (std::size_t t = 0; t < n_; ++t) {
          const double r = r_[t] - p_.lambda * h(t);
          ll += -0.5 * (kLog2Pi + h(t) + r * r * std::exp(-h(t)));
        }
        break;
      case ObsKind::t_marginal:
        for (std::size_t t = 0; t < n_; ++t)
          ll += stats::student_t_std_logpdf(r_[t], std::exp(h(t)), p_.nu);
        break;
      case ObsKind::t_aug:
        for (std::size_t t = 0; t < n_; ++t)
          ll += norm_logpdf(r_[t], cc * lam_[t] * std::exp(h(t)));
        break;
      case ObsKind::jump_marginal:
        for (std::size_t t = 0; t < n_; ++t) {
          const double w = std::exp(h(t));
          const double l0 = std::log1p(-p_.kappa) + norm_logpdf(r_[t], w);
          const double l1 = p_.kappa > 0.0
                                ? std::log(p_.kappa) + norm_logpdf(r_[t] - p_.mu_j, w + s)
                                : kNegInf;
          ll += log_sum_exp(l0, l1);
        }
        break;
      case ObsKind::jump_aug:
        for (std::size_t t = 0; t < n_; ++t)
          ll += norm_logpdf(r_[t] - del_[t] * p_.mu_j,
                            std::exp(h(t)) + del_[t] * s);
        break;
      case ObsKind::leverage: {
        const double om = 1.0 - p_.rho * p_.rho;
        for (std::size_t t = 0; t + 1 < n_; ++t) {
          const double eta = (h(t + 1) - p_.mu_h - p_.phi * (h(t) - p_.mu_h)) / p_.sigma_h;
          const double sq = std::exp(0.5 * h(t));
          ll += norm_logpdf(r_[t] - p_.rho * eta * sq, sq * sq * om);
        }
        ll += norm_logpdf(r_[n_ - 1], std::exp(h(n_ - 1)));
        break;
      }
    }
    return ll;
  }

  void derivs(const Eigen::VectorXd& h, Eigen::VectorXd& grad,
              Eigen::VectorXd& cdiag, Eigen::VectorXd& coff) const {
    const auto n = static_cast<Eigen::Index>(n_);
    grad.setZero(n);
    cdiag.setZero(n);
    coff.setZero(n > 0 ? n - 1 : 0);
    const double s = p_.sigma_j * p_.sigma_j;
    const double cc = (p_.nu - 2.0) / p_.nu;
    switch (kind_) {
      case ObsKind::plain:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double a = r_[t] * r_[t] * std::exp(-h(t));
          grad(t) = -0.5 + 0.5 * a;
          cdiag(t) = std::max(0.5 * a, kCurvFloor);
        }
        break;
      case ObsKind::in_mean:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double r = r_[t] - p_.lambda * h(t);
          const double e = std::exp(-h(t));
          grad(t) = -0.5 + e * (p_.lambda * r + 0.5 * r * r);
          cdiag(t) = p_.lambda * p_.lambda * e + 0.5;
        }
        break;
      case ObsKind::t_marginal:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double a = r_[t] * r_[t] * std::exp(-h(t)) / (p_.nu - 2.0);
          const double f = a / (1.0 + a);
          grad(t) = -0.5 + 0.5 * (p_.nu + 1.0) * f;
          cdiag(t) = std::max(0.5 * (p_.nu + 1.0) * f / (1.0 + a), kCurvFloor);
        }
        break;
      case ObsKind::t_aug:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double a = r_[t] * r_[t] * std::exp(-h(t)) / (cc * lam_[t]);
          grad(t) = -0.5 + 0.5 * a;
          cdiag(t) = std::max(0.5 * a, kCurvFloor);
        }
        break;
      case ObsKind::jump_marginal:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double w = std::exp(h(t));
          const double r = r_[t];
          const double l0 = std::log1p(-p_.kappa) + norm_logpdf(r, w);
          const double l1 = p_.kappa > 0.0
                                ? std::log(p_.kappa) + norm_logpdf(r - p_.mu_j, w + s)
                                : kNegInf;
          const double lse = log_sum_exp(l0, l1);
          const double w1 = l1 == kNegInf ? 0.0 : std::exp(l1 - lse);
          const double g0 = -0.5 + 0.5 * r * r / w;
          const double c0 = std::max(0.5 * r * r / w, kCurvFloor);
          const double v = w + s;
          const double rr = r - p_.mu_j;
          const double g1 = w * (-0.5 / v + 0.5 * rr * rr / (v * v));
          const double exact1 = 0.5 * w * s / (v * v) -
                                0.5 * rr * rr * w * (v - 2.0 * w) / (v * v * v);
          const double c1 = exact1 > kCurvFloor ? exact1 : 0.5 * w * w / (v * v);
          grad(t) = (1.0 - w1) * g0 + w1 * g1;
          cdiag(t) = std::max((1.0 - w1) * c0 + w1 * c1, kCurvFloor);
        }
        break;
      case ObsKind::jump_aug:
        for (Eigen::Index t = 0; t < n; ++t) {
          const double w = std::exp(h(t));
          if (del_[t] == 0) {
            const double a = r_[t] * r_[t] / w;
            grad(t) = -0.5 + 0.5 * a;
            cdiag(t) = std::max(0.5 * a, kCurvFloor);
          } else {
            const double v = w + s;
            const double rr = r_[t] - p_.mu_j;
            grad(t) = w * (-0.5 / v + 0.5 * rr * rr / (v * v));
            const double exact = 0.5 * w * s / (v * v) -
                                 0.5 * rr * rr * w * (v - 2.0 * w) / (v * v * v);
            cdiag(t) = exact > kCurvFloor ? exact : 0.5 * w * w / (v * v);
          }
        }
        break;
      case ObsKind::leverage: {
        const double om = 1.0 - p_.rho * p_.rho;
        for (Eigen::Index t = 0; t + 1 < n; ++t) {
          const double eta = (h(t + 1) - p_.mu_h - p_.phi * (h(t) - p_.mu_h)) / p_.sigma_h;
          const double sq = std::exp(0.5 * h(t));
          const double v = sq * sq * om;
          const double e = r_[t] - p_.rho * eta * sq;
          const double dm_t = sq * p_.rho * (0.5 * eta - p_.phi / p_.sigma_h);
          const double dm_n = sq * p_.rho / p_.sigma_h;
          grad(t) += e / v * dm_t + 0.5 * (e * e / v - 1.0);
          grad(t + 1) += e / v * dm_n;
          cdiag(t) += dm_t * dm_t / v + 0.5;
          cdiag(t + 1) += dm_n * dm_n / v;
          coff(t) += dm_t * dm_n / v;
        }
        const double w = std::exp(h(n - 1));
        grad(n - 1) += 0.5 * (r_[n_ - 1] * r_[n_ - 1] / w - 1.0);
        cdiag(n - 1) += 0.5;
        break;
      }
    }
  }

 private:
  SvParams p_;
  std::size_t n_;
  ObsKind kind_ = ObsKind::plain;
  std::vector<double> r_;
  std::vector<double> lam_;
  std::vector<int> del_;
};

double log_joint_h(const Obs& obs, const StatePrior& sp, const Eigen::VectorXd& h) {
  const Eigen::VectorXd x = h.array() - sp.mu_h;
  return obs.loglik(h) + sp.log_norm - 0.5 * quad_form(sp.q, to_std(x));
}

/// Gaussian approximation N(mode, prec^-1) to p(h | y, theta, aux).
struct GaussApprox {
  Eigen::VectorXd mode;
  BandedSpd prec;
  double logdet = 0.0;
};

BandedSpd build_prec(const StatePrior& sp, const Eigen::VectorXd& cdiag,
                     const Eigen::VectorXd& coff) {
  BandedSpd p = sp.q;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) p.at(i, 0) += cdiag(static_cast<Eigen::Index>(i));
  if (p.bandwidth() >= 1)
    for (std::size_t i = 0; i + 1 < n; ++i)
      p.at(i + 1, 1) += coff(static_cast<Eigen::Index>(i));
  if (!p.factor())
    throw Error(Errc::numeric_failure, "conditional state precision factorization failed");
  return p;
}

GaussApprox fit_mode(const Obs& obs, const StatePrior& sp, Eigen::VectorXd h) {
  double f = log_joint_h(obs, sp, h);
  if (!std::isfinite(f)) {
    h.setConstant(sp.mu_h);
    f = log_joint_h(obs, sp, h);
  }
  Eigen::VectorXd grad, cdiag, coff;
  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    obs.derivs(h, grad, cdiag, coff);
    const Eigen::VectorXd x = h.array() - sp.mu_h;
    const Eigen::VectorXd g = grad - to_eigen(sp.q.multiply(to_std(x)));
    if (g.lpNorm<Eigen::Infinity>() < 1e-8 * (1.0 + std::abs(f))) {
      converged = true;
      break;
    }
    BandedSpd prec = build_prec(sp, cdiag, coff);
    const Eigen::VectorXd dir = to_eigen(prec.solve(to_std(g)));
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      const Eigen::VectorXd hn = h + step * dir;
      const double fn = log_joint_h(obs, sp, hn);
      if (std::isfinite(fn) && fn > f) {
        h = hn;
        f = fn;
        improved = true;
        break;
      }
    }
    if (!improved || step * dir.lpNorm<Eigen::Infinity>() < 1e-10) converged = true;
  }
  obs.derivs(h, grad, cdiag, coff);
  {
    const Eigen::VectorXd x = h.array() - sp.mu_h;
    const Eigen::VectorXd g = grad - to_eigen(sp.q.multiply(to_std(x)));
    if (!converged && g.lpNorm<Eigen::Infinity>() > 1e-5 * (1.0 + std::abs(f)))
      throw Error(Errc::mode_search_failure,
                  "state-posterior Newton search did not converge in 100 iterations");
  }
  GaussApprox ga{std::move(h), build_prec(sp, cdiag, coff), 0.0};
  ga.logdet = ga.prec.logdet();
  return ga;
}

Eigen::VectorXd draw_state(const GaussApprox& ga, Rng& rng) {
  std::vector<double> z(ga.prec.size());
  for (auto& zi : z) zi = rng.normal();
  return ga.mode + to_eigen(ga.prec.solve_lt(z));
}

double proposal_logpdf(const GaussApprox& ga, const Eigen::VectorXd& h) {
  const Eigen::VectorXd dev = h - ga.mode;
  return 0.5 * ga.logdet - 0.5 * static_cast<double>(h.size()) * kLog2Pi -
         0.5 * quad_form(ga.prec, to_std(dev));
}

LatentPath sample_impl(const Obs& obs, const StatePrior& sp,
                       const Eigen::VectorXd& cur, Rng& rng) {
  const GaussApprox ga = fit_mode(obs, sp, cur);
  const Eigen::VectorXd prop = draw_state(ga, rng);
  const double lt_new = log_joint_h(obs, sp, prop);
  const double lt_old = log_joint_h(obs, sp, cur);
  const double la = (lt_new - proposal_logpdf(ga, prop)) -
                    (lt_old - proposal_logpdf(ga, cur));
  LatentPath out;
  if (std::log(rng.uniform()) < la) {
    out.h = prop;
    out.loglik_at_path = lt_new;
    out.accepted = true;
  } else {
    out.h = cur;
    out.loglik_at_path = lt_old;
    out.accepted = false;
  }
  return out;
}

}  // namespace

LatentPath sample_states(const VolatilityModelSpec& spec, const SvParams& p,
                         const Series& y, const Eigen::VectorXd& current_h,
                         std::uint64_t seed, const SvAux& aux) {
  check_family(spec);
  validate_params(spec, p);
  y.validate();
  if (static_cast<std::size_t>(current_h.size()) != y.size())
    throw Error(Errc::length_mismatch, "current_h length != data length");
  if (!current_h.allFinite())
    throw Error(Errc::invalid_argument, "current_h has non-finite entries");
  const Obs obs(spec, p, y.values, aux);
  const StatePrior sp = state_prior(spec, p, y.size());
  Rng rng(Rng::derive(seed, Rng::stream_of("sv-states")));
  return sample_impl(obs, sp, current_h, rng);
}

IntegratedLoglik sv_integrated_loglik(const VolatilityModelSpec& spec,
                                      const SvParams& p, const Series& y,
                                      int n_is_draws, std::uint64_t seed) {
  check_family(spec);
  validate_params(spec, p);
  y.validate();
  if (n_is_draws < 2)
    throw Error(Errc::invalid_argument, "need at least 2 importance draws");
  const Obs obs(spec, p, y.values, SvAux{});
  const StatePrior sp = state_prior(spec, p, y.size());
  Eigen::VectorXd h0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(y.size()), p.mu_h);
  const GaussApprox ga = fit_mode(obs, sp, std::move(h0));

  Rng rng(Rng::derive(seed, Rng::stream_of("sv-integrated-loglik")));
  std::vector<double> lw(static_cast<std::size_t>(n_is_draws));
  for (auto& w : lw) {
    const Eigen::VectorXd h = draw_state(ga, rng);
    w = log_joint_h(obs, sp, h) - proposal_logpdf(ga, h);
  }
  const double m = *std::max_element(lw.begin(), lw.end());
  double s1 = 0.0, s2 = 0.0;
  for (double w : lw) {
    const double e = std::exp(w - m);
    s1 += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(n_is_draws);
  IntegratedLoglik out;
  out.value = m + std::log(s1 / n);
  out.ess = s1 * s1 / s2;
  out.n_draws = n_is_draws;
  if (out.ess < 0.01 * n)
    throw Error(Errc::degenerate_weights,
                "importance-sampling ESS below 1% of draws");
  out.nse = std::sqrt(std::max(0.0, n * s2 / (s1 * s1) - 1.0) / n);
  return out;
}

PosteriorDraws fit_sv_bayes(const VolatilityModelSpec& spec, const Series& y,
                            const PriorConfig& prior, const McmcConfig& mcmc) {
  check_family(spec);
  y.validate();
  if (y.size() < 100)
    throw Error(Errc::too_short, "SV estimation needs T >= 100");
  if (mcmc.n_draws < 1000)
    throw Error(Errc::invalid_argument, "need n_draws >= 1000 after burn-in");
  const double samp_var = stats::sample_variance(y.values);
  if (!(samp_var > 0.0))
    throw Error(Errc::chain_divergence, "constant series has no volatility scale");

  const ModelPriors priors(spec, prior);
  const auto names = param_names(spec);
  const int d = static_cast<int>(names.size());
  auto transforms = param_transforms(spec);
  for (int i = 0; i < d; ++i)
    if (names[i] == "kappa") transforms[i] = Transform::logit(0.0, prior.kappa_max);

  const bool lev = spec.has(Feature::leverage);
  const bool ma = spec.has(Feature::ma1);
  const bool inm = spec.has(Feature::in_mean);
  const bool tfeat = spec.has(Feature::student_t);
  const bool jfeat = spec.has(Feature::jump);
  const auto T = y.size();
  const auto nT = static_cast<Eigen::Index>(T);

  auto conjugate = [&](const std::string& nm) {
    if (nm == "mu" || nm == "lambda" || nm == "mu_j") return true;
    if (nm == "mu_h" || nm == "sigma_h") return !lev;
    return false;
  };

  PosteriorDraws out;
  out.spec = spec;
  out.param_names = names;
  out.seed = mcmc.seed;
  out.timestamps = y.timestamps;
  out.draws.resize(static_cast<Eigen::Index>(mcmc.n_draws) * mcmc.n_chains, d);
  out.acceptance_rates.assign(static_cast<std::size_t>(d) + 1, 0.0);
  Eigen::VectorXd vol_accum = Eigen::VectorXd::Zero(nT);
  long long state_accepted = 0, state_total = 0;

  for (int chain = 0; chain < mcmc.n_chains; ++chain) {
    Rng rng(Rng::derive(mcmc.seed, Rng::stream_of("sv-chain") + chain));

    SvParams p;
    p.mu = stats::mean(y.values);
    p.mu_h = std::log(std::max(samp_var, 1e-8));
    p.phi = 0.9;
    p.phi2 = 0.0;
    p.sigma_h = 0.3;
    p.kappa = jfeat ? 0.5 * prior.kappa_max : 0.0;
    p.sigma_j = std::sqrt(samp_var);
    Eigen::VectorXd h = Eigen::VectorXd::Constant(nT, p.mu_h);
    SvAux aux;
    if (jfeat) aux.jump.assign(T, 0);
    if (tfeat) aux.t_scale.assign(T, 1.0);

    std::vector<AdaptiveScale> scales(d, AdaptiveScale(0.1));

    auto log_joint_params = [&](const SvParams& cand) {
      const double lp = priors.log_density(cand);
      if (!std::isfinite(lp)) return kNegInf;
      double lj = lp;
      const StatePrior sp = state_prior(spec, cand, T);
      const Eigen::VectorXd x = h.array() - sp.mu_h;
      lj += sp.log_norm - 0.5 * quad_form(sp.q, to_std(x));
      if (jfeat) {
        int sum = 0;
        for (int dlt : aux.jump) sum += dlt;
        lj += sum * std::log(cand.kappa) + (static_cast<int>(T) - sum) * std::log1p(-cand.kappa);
      }
      if (tfeat) {
        const double a = 0.5 * cand.nu;
        const double lg = a * std::log(a) - std::lgamma(a);
        for (double lm : aux.t_scale)
          lj += lg - (a + 1.0) * std::log(lm) - a / lm;
      }
      lj += Obs(spec, cand, y.values, aux).loglik(h);
      return lj;
    };

    const int total_sweeps = mcmc.n_burnin + mcmc.n_draws;
    for (int it = 0; it < total_sweeps; ++it) {
      if (it == mcmc.n_burnin)
        for (auto& sc : scales) {
          sc.freeze();
          sc.reset_counts();
        }

      // 1. latent path
      {
        const Obs obs(spec, p, y.values, aux);
        const StatePrior sp = state_prior(spec, p, T);
        LatentPath lp = sample_impl(obs, sp, h, rng);
        h = lp.h;
        if (it >= mcmc.n_burnin) {
          ++state_total;
          if (lp.accepted) ++state_accepted;
        }
      }

      // 2. feature augmentation
      if (tfeat) {
        const double cc = (p.nu - 2.0) / p.nu;
        for (std::size_t t = 0; t < T; ++t) {
          const double r = y.values[t] - p.mu;
          const double e2 = r * r * std::exp(-h(static_cast<Eigen::Index>(t))) / cc;
          aux.t_scale[t] = rng.inverse_gamma(0.5 * (p.nu + 1.0), 0.5 * (p.nu + e2));
        }
      }
      if (jfeat) {
        const double s = p.sigma_j * p.sigma_j;
        for (std::size_t t = 0; t < T; ++t) {
          const double w = std::exp(h(static_cast<Eigen::Index>(t)));
          const double r = y.values[t] - p.mu;
          const double l0 = std::log1p(-p.kappa) + norm_logpdf(r, w);
          const double l1 = std::log(p.kappa) + norm_logpdf(r - p.mu_j, w + s);
          const double pr1 = std::exp(l1 - log_sum_exp(l0, l1));
          aux.jump[t] = rng.uniform() < pr1 ? 1 : 0;
        }
      }

      // 3. mean block (conjugate); jointly with lambda (SV-M) or mu_j (SV-J)
      if (inm || jfeat) {
        Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
        Eigen::Vector2d b = Eigen::Vector2d::Zero();
        a(0, 0) = a(1, 1) = 1.0 / prior.mean_var;
        const double s = p.sigma_j * p.sigma_j;
        for (std::size_t t = 0; t < T; ++t) {
          const auto ti = static_cast<Eigen::Index>(t);
          const double w = std::exp(h(ti));
          const double x2 = inm ? h(ti) : static_cast<double>(aux.jump[t]);
          const double v = inm ? w : w + aux.jump[t] * s;
          Eigen::Vector2d xt(1.0, x2);
          a += xt * xt.transpose() / v;
          b += xt * y.values[t] / v;
        }
        const Eigen::LLT<Eigen::Matrix2d> llt(a);
        const Eigen::Vector2d mean = llt.solve(b);
        Eigen::Vector2d z(rng.normal(), rng.normal());
        const Eigen::Vector2d draw =
            mean + llt.matrixU().solve(z);
        p.mu = draw(0);
        if (inm)
          p.lambda = draw(1);
        else
          p.mu_j = draw(1);
      } else {
        double prec = 1.0 / prior.mean_var;
        double num = 0.0;
        if (ma) {
          double aprev = 0.0, bprev = 0.0;
          for (std::size_t t = 0; t < T; ++t) {
            const double at = y.values[t] - p.psi * aprev;
            const double bt = 1.0 - p.psi * bprev;
            const double w = std::exp(h(static_cast<Eigen::Index>(t)));
            prec += bt * bt / w;
            num += at * bt / w;
            aprev = at;
            bprev = bt;
          }
        } else if (lev) {
          const double om = 1.0 - p.rho * p.rho;
          for (std::size_t t = 0; t < T; ++t) {
            const auto ti = static_cast<Eigen::Index>(t);
            const double w = std::exp(h(ti));
            double o = 0.0, v = w;
            if (t + 1 < T) {
              const double eta =
                  (h(ti + 1) - p.mu_h - p.phi * (h(ti) - p.mu_h)) / p.sigma_h;
              o = p.rho * eta * std::sqrt(w);
              v = w * om;
            }
            prec += 1.0 / v;
            num += (y.values[t] - o) / v;
          }
        } else {
          const double cc = (p.nu - 2.0) / p.nu;
          for (std::size_t t = 0; t < T; ++t) {
            const double w = std::exp(h(static_cast<Eigen::Index>(t)));
            const double v = tfeat ? cc * aux.t_scale[t] * w : w;
            prec += 1.0 / v;
            num += y.values[t] / v;
          }
        }
        p.mu = num / prec + rng.normal() / std::sqrt(prec);
      }

      // 4. state-level conjugates (the observation density depends on them
      // under leverage, where they fall through to the RWM block instead)
      if (!lev) {
        {
          const StatePrior sp = state_prior(spec, p, T);
          const std::vector<double> ones(T, 1.0);
          const auto q1 = sp.q.multiply(ones);
          double s11 = 0.0, s1h = 0.0;
          for (std::size_t i = 0; i < T; ++i) {
            s11 += q1[i];
            s1h += q1[i] * h(static_cast<Eigen::Index>(i));
          }
          const double prec = s11 + 1.0 / prior.mu_h_var;
          p.mu_h = s1h / prec + rng.normal() / std::sqrt(prec);
        }
        {
          double ssr = 0.0;
          const Eigen::VectorXd x = h.array() - p.mu_h;
          if (spec.variance_lags == 1) {
            ssr += (1.0 - p.phi * p.phi) * x(0) * x(0);
            for (Eigen::Index t = 1; t < nT; ++t) {
              const double e = x(t) - p.phi * x(t - 1);
              ssr += e * e;
            }
          } else {
            double g0, g1;
            ar2_unit_gammas(p.phi, p.phi2, g0, g1);
            const double det = g0 * g0 - g1 * g1;
            ssr += (g0 * x(0) * x(0) + g0 * x(1) * x(1) - 2.0 * g1 * x(0) * x(1)) / det;
            for (Eigen::Index t = 2; t < nT; ++t) {
              const double e = x(t) - p.phi * x(t - 1) - p.phi2 * x(t - 2);
              ssr += e * e;
            }
          }
          const double sig2 = rng.inverse_gamma(prior.sigma_h2_shape + 0.5 * T,
                                                prior.sigma_h2_scale + 0.5 * ssr);
          p.sigma_h = std::sqrt(sig2);
        }
      }

      // 5. random-walk blocks
      for (int i = 0; i < d; ++i) {
        if (conjugate(names[i])) continue;
        Eigen::VectorXd packed = pack_params(spec, p);
        const double z_old = transforms[i].to_unconstrained(packed(i));
        const double z_new = z_old + scales[i].scale() * rng.normal();
        packed(i) = transforms[i].to_natural(z_new);
        const SvParams cand = unpack_sv(spec, packed);
        const double lt_new = log_joint_params(cand) + transforms[i].log_jacobian(z_new);
        const double lt_old = log_joint_params(p) + transforms[i].log_jacobian(z_old);
        const bool accept =
            std::isfinite(lt_new) && std::log(rng.uniform()) < lt_new - lt_old;
        if (accept) p = cand;
        scales[i].observe(accept);
      }

      if (it >= mcmc.n_burnin) {
        const int kept = it - mcmc.n_burnin;
        out.draws.row(static_cast<Eigen::Index>(chain) * mcmc.n_draws + kept) =
            pack_params(spec, p).transpose();
        vol_accum += (0.5 * h.array()).exp().matrix();
        if (kept % 10 == 0) out.state_paths.push_back(h);
      }
    }

    for (int i = 0; i < d; ++i) {
      const double rate = conjugate(names[i]) ? 1.0 : scales[i].acceptance_rate();
      out.acceptance_rates[static_cast<std::size_t>(i)] += rate / mcmc.n_chains;
    }
  }

  out.acceptance_rates.back() =
      state_total > 0 ? static_cast<double>(state_accepted) / state_total : 0.0;
  out.volatility_mean =
      vol_accum / static_cast<double>(static_cast<Eigen::Index>(mcmc.n_draws) * mcmc.n_chains);

  for (int i = 0; i < d; ++i)
    if (!conjugate(names[i]) && out.acceptance_rates[static_cast<std::size_t>(i)] < 0.01)
      throw Error(Errc::chain_divergence,
                  "random-walk acceptance below 1% after adaptation on " + names[i]);
  return out;
}

Series simulate_sv(const VolatilityModelSpec& spec, const SvParams& p,
                   int t_len, std::uint64_t seed) {
  check_family(spec);
  validate_params(spec, p);
  if (t_len < 1) throw Error(Errc::invalid_argument, "t_len must be >= 1");

  Rng state(Rng::derive(seed, Rng::stream_of("sv-sim-state")));
  Rng shocks(Rng::derive(seed, Rng::stream_of("sv-sim-obs")));
  Rng jump_arrival(Rng::derive(seed, Rng::stream_of("jump-arrival")));
  Rng jump_size(Rng::derive(seed, Rng::stream_of("jump-size")));
  Rng t_mixture(Rng::derive(seed, Rng::stream_of("t-mixture")));

  const auto T = static_cast<std::size_t>(t_len);
  std::vector<double> x(T + 1, 0.0);
  std::vector<double> eta(T + 1, 0.0);
  if (spec.variance_lags == 1) {
    x[0] = state.normal() * p.sigma_h / std::sqrt(1.0 - p.phi * p.phi);
    for (std::size_t t = 0; t < T; ++t) {
      eta[t + 1] = state.normal();
      x[t + 1] = p.phi * x[t] + p.sigma_h * eta[t + 1];
    }
  } else {
    double g0u, g1u;
    ar2_unit_gammas(p.phi, p.phi2, g0u, g1u);
    const double s2 = p.sigma_h * p.sigma_h;
    const double l11 = std::sqrt(s2 * g0u);
    const double l21 = s2 * g1u / l11;
    const double l22 = std::sqrt(std::max(s2 * g0u - l21 * l21, 1e-300));
    const double z1 = state.normal(), z2 = state.normal();
    x[0] = l11 * z1;
    if (T > 1) x[1] = l21 * z1 + l22 * z2;
    for (std::size_t t = 2; t <= T; ++t)
      x[t] = p.phi * x[t - 1] + p.phi2 * x[t - 2] + p.sigma_h * state.normal();
  }

  const double cc = (p.nu - 2.0) / p.nu;
  std::vector<double> out(T);
  double u_prev = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double ht = p.mu_h + x[t];
    double eps;
    if (spec.has(Feature::student_t)) {
      const double lam = t_mixture.inverse_gamma(0.5 * p.nu, 0.5 * p.nu);
      eps = std::sqrt(cc * lam) * shocks.normal();
    } else if (spec.has(Feature::leverage)) {
      eps = p.rho * eta[t + 1] + std::sqrt(1.0 - p.rho * p.rho) * shocks.normal();
    } else {
      eps = shocks.normal();
    }
    const double u = std::exp(0.5 * ht) * eps;
    double yt = p.mu + u;
    if (spec.has(Feature::in_mean)) yt += p.lambda * ht;
    if (spec.has(Feature::ma1)) yt += p.psi * u_prev;
    if (spec.has(Feature::jump) && jump_arrival.uniform() < p.kappa)
      yt += p.mu_j + p.sigma_j * jump_size.normal();
    out[t] = yt;
    u_prev = u;
  }
  return Series::from_values(spec.name() + "_sim", std::move(out));
}

Series extract_volatility(const PosteriorDraws& fit) {
  if (fit.volatility_mean.size() == 0 ||
      static_cast<std::size_t>(fit.volatility_mean.size()) != fit.timestamps.size())
    throw Error(Errc::empty_fit, "fit carries no stored volatility path");
  Series s;
  s.name = fit.spec.name() + "_vol";
  s.timestamps = fit.timestamps;
  s.values.assign(fit.volatility_mean.data(),
                  fit.volatility_mean.data() + fit.volatility_mean.size());
  s.validate();
  return s;
}

}  // namespace qcv::vol
