#include "qcv/volatility/priors.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qcv/errors.hpp"

namespace qcv::vol {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

// Composite Simpson with 64 intervals; f must be smooth on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b) {
  constexpr int n = 64;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// P(0 < X < u) for X half-normal(sd).
double half_normal_mass(double u, double sd) {
  if (u <= 0.0) return 0.0;
  return std::erf(u / (sd * 1.4142135623730951));
}

// Closed at the origin so quadrature endpoints carry their full weight;
// log_half_normal_density treats x = 0 as outside the support.
double half_normal_pdf(double x, double sd) {
  return 2.0 / (sd * 2.5066282746310002) * std::exp(-x * x / (2.0 * sd * sd));
}

// Mass of the half-normal(sd) product over {x_i > 0, sum w_i x_i < 1} for
// 2 or 3 coordinates; the innermost coordinate integrates in closed form.
double region_mass(const std::vector<double>& w, double sd) {
  if (w.size() == 2) {
    auto inner = [&](double x0) {
      return half_normal_pdf(x0, sd) *
             half_normal_mass((1.0 - w[0] * x0) / w[1], sd);
    };
    return simpson(inner, 0.0, 1.0 / w[0]);
  }
  if (w.size() == 3) {
    auto mid = [&](double x0) {
      const double rem0 = 1.0 - w[0] * x0;
      auto inner = [&](double x1) {
        return half_normal_pdf(x1, sd) *
               half_normal_mass((rem0 - w[1] * x1) / w[2], sd);
      };
      return half_normal_pdf(x0, sd) * simpson(inner, 0.0, rem0 / w[1]);
    };
    return simpson(mid, 0.0, 1.0 / w[0]);
  }
  throw Error(Errc::invalid_argument, "variance block must have 2 or 3 params");
}

double log_beta_transformed_phi(double phi, double a, double b) {
  if (phi <= -1.0 || phi >= 1.0) return kNegInf;
  const double u = 0.5 * (phi + 1.0);
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
         (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) -
         std::log(2.0);
}

double log_shifted_gamma(double nu, double shape, double scale) {
  if (nu <= 2.0) return kNegInf;
  const double x = nu - 2.0;
  return -std::lgamma(shape) - shape * std::log(scale) +
         (shape - 1.0) * std::log(x) - x / scale;
}

}  // namespace

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - d * d / (2.0 * var);
}

double log_half_normal_density(double x, double sd) {
  if (x <= 0.0) return kNegInf;
  return std::log(2.0) - 0.5 * kLog2Pi - std::log(sd) - x * x / (2.0 * sd * sd);
}

double log_inv_gamma_density(double x, double shape, double scale) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

ModelPriors::ModelPriors(const VolatilityModelSpec& spec, const PriorConfig& cfg)
    : spec_(spec), cfg_(cfg) {
  spec_.validate();
  if (spec_.family == Family::garch) {
    std::vector<double> w{1.0, 1.0};  // alpha1, beta1
    if (spec_.variance_lags == 2) w.push_back(1.0);
    if (spec_.has(Feature::leverage)) w.push_back(0.5);
    log_z_ = std::log(region_mass(w, cfg_.var_sd));
  }
}

double ModelPriors::log_density(const GarchParams& p) const {
  if (!params_valid(spec_, p)) return kNegInf;
  double lp = log_normal_density(p.mu, 0.0, cfg_.mean_var);
  lp += log_half_normal_density(p.alpha0, cfg_.var_sd);
  lp += log_half_normal_density(p.alpha1, cfg_.var_sd);
  lp += log_half_normal_density(p.beta1, cfg_.var_sd);
  if (spec_.variance_lags == 2)
    lp += log_half_normal_density(p.beta2, cfg_.var_sd);
  if (spec_.has(Feature::leverage))
    lp += log_half_normal_density(p.gamma, cfg_.var_sd);
  lp -= log_z_;
  if (spec_.has(Feature::in_mean))
    lp += log_normal_density(p.lambda, 0.0, cfg_.mean_var);
  if (spec_.has(Feature::ma1)) lp -= std::log(2.0);
  if (spec_.has(Feature::student_t))
    lp += log_shifted_gamma(p.nu, cfg_.nu_shape, cfg_.nu_scale);
  if (spec_.has(Feature::jump)) {
    if (p.kappa >= cfg_.kappa_max) return kNegInf;
    lp -= std::log(cfg_.kappa_max);
    lp += log_normal_density(p.mu_j, 0.0, cfg_.mean_var);
    lp += log_half_normal_density(p.sigma_j, cfg_.var_sd);
  }
  return lp;
}

double ModelPriors::log_density(const SvParams& p) const {
  if (!params_valid(spec_, p)) return kNegInf;
  double lp = log_normal_density(p.mu, 0.0, cfg_.mean_var);
  lp += log_normal_density(p.mu_h, 0.0, cfg_.mu_h_var);
  if (spec_.variance_lags == 2) {
    lp += std::log(0.25);  // uniform over the AR(2) stationarity triangle
  } else {
    lp += log_beta_transformed_phi(p.phi, cfg_.phi_beta_a, cfg_.phi_beta_b);
  }
  // sigma_h^2 ~ inv-gamma, evaluated in sigma_h with the change of variables.
  lp += log_inv_gamma_density(p.sigma_h * p.sigma_h, cfg_.sigma_h2_shape,
                              cfg_.sigma_h2_scale) +
        std::log(2.0 * p.sigma_h);
  if (spec_.has(Feature::in_mean))
    lp += log_normal_density(p.lambda, 0.0, cfg_.mean_var);
  if (spec_.has(Feature::ma1)) lp -= std::log(2.0);
  if (spec_.has(Feature::student_t))
    lp += log_shifted_gamma(p.nu, cfg_.nu_shape, cfg_.nu_scale);
  if (spec_.has(Feature::leverage)) lp -= std::log(2.0);
  if (spec_.has(Feature::jump)) {
    if (p.kappa >= cfg_.kappa_max) return kNegInf;
    lp -= std::log(cfg_.kappa_max);
    lp += log_normal_density(p.mu_j, 0.0, cfg_.mean_var);
    lp += log_half_normal_density(p.sigma_j, cfg_.var_sd);
  }
  return lp;
}

double ModelPriors::log_density(const Eigen::VectorXd& packed) const {
  if (spec_.family == Family::garch)
    return log_density(unpack_garch(spec_, packed));
  return log_density(unpack_sv(spec_, packed));
}

}  // namespace qcv::vol
