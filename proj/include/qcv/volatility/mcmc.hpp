#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcv/math/rng.hpp"
#include "qcv/volatility/spec.hpp"

namespace qcv::vol {

/// Monotone map between a constrained natural parameter and an unconstrained
/// sampling coordinate.
struct Transform {
  enum class Kind { identity, log_pos, logit, log_shift2 };
  Kind kind = Kind::identity;
  double lo = -1.0;
  double hi = 1.0;

  double to_unconstrained(double x) const;
  double to_natural(double z) const;
  double log_jacobian(double z) const;  // log |d natural / d z|

  static Transform identity() { return {Kind::identity, 0, 0}; }
  static Transform log_pos() { return {Kind::log_pos, 0, 0}; }
  static Transform logit(double lo, double hi) { return {Kind::logit, lo, hi}; }
  /// natural = 2 + exp(z), for Student-t dof
  static Transform log_shift2() { return {Kind::log_shift2, 0, 0}; }
};

/// Sampling transform for each parameter of a model, aligned with
/// param_names(spec).
std::vector<Transform> param_transforms(const VolatilityModelSpec& spec);

/// Robbins-Monro step-size adaptation for a scalar random-walk proposal,
/// targeting acceptance near 0.44. Frozen after burn-in.
class AdaptiveScale {
 public:
  explicit AdaptiveScale(double initial = 0.1) : log_s_(std::log(initial)) {}

  double scale() const { return std::exp(log_s_); }
  void observe(bool accepted);
  void freeze() { frozen_ = true; }
  double acceptance_rate() const {
    return n_ == 0 ? 0.0 : static_cast<double>(acc_) / n_;
  }
  void reset_counts() {
    n_ = 0;
    acc_ = 0;
  }

 private:
  double log_s_;
  long long n_ = 0;
  long long acc_ = 0;
  bool frozen_ = false;
};

/// Split-chain Gelman-Rubin statistic for one parameter; chains holds one
/// draw vector per chain.
double gelman_rubin(const std::vector<Eigen::VectorXd>& chains);

/// Generic single-site adaptive random-walk Metropolis on the transformed
/// scale. log_target takes the natural-scale parameter vector and returns
/// the unnormalized log posterior (likelihood + prior), -inf outside the
/// support. Draws are recorded on the natural scale post burn-in.
struct RwmResult {
  Eigen::MatrixXd draws;
  std::vector<double> acceptance_rates;
};
RwmResult adaptive_rwm(const std::function<double(const Eigen::VectorXd&)>& log_target,
                       const std::vector<Transform>& transforms,
                       const Eigen::VectorXd& init_natural, int n_draws,
                       int n_burnin, Rng& rng);

}  // namespace qcv::vol
