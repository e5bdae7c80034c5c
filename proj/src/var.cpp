#include "qcv/var.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcv/errors.hpp"
#include "qcv/math/stats.hpp"

namespace qcv {
namespace {

void check_system(const std::vector<Series>& system) {
  if (system.size() < 2)
    throw Error(Errc::invalid_argument, "VAR needs at least two series");
  for (const auto& s : system) s.validate();
  for (std::size_t i = 1; i < system.size(); ++i) {
    if (system[i].timestamps != system[0].timestamps)
      throw Error(Errc::timestamp_mismatch,
                  "VAR series must share identical timestamps");
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      if (system[i].name == system[j].name)
        throw Error(Errc::invalid_argument,
                    "duplicate series name in VAR system: " + system[i].name);
    }
  }
}

int variable_index(const VarModel& m, const std::string& name) {
  auto it = std::find(m.variables.begin(), m.variables.end(), name);
  if (it == m.variables.end())
    throw Error(Errc::unknown_variable, "variable not in VAR: " + name);
  return static_cast<int>(it - m.variables.begin());
}

}  // namespace

VarModel fit_var(const std::vector<Series>& system, int p) {
  check_system(system);
  if (p < 1) throw Error(Errc::invalid_argument, "VAR lag must be >= 1");
  const int k = static_cast<int>(system.size());
  const int t_len = static_cast<int>(system[0].values.size());
  const int ncols = k * p + 1;
  const int t_eff = t_len - p;
  if (t_eff <= ncols + 2)
    throw Error(Errc::too_short, "series too short for VAR(" +
                                     std::to_string(p) + ")");

  Eigen::MatrixXd X(t_eff, ncols);
  Eigen::MatrixXd Y(t_eff, k);
  for (int r = 0; r < t_eff; ++r) {
    const int t = p + r;  // 0-based index into values
    X(r, 0) = 1.0;
    for (int l = 1; l <= p; ++l)
      for (int v = 0; v < k; ++v)
        X(r, 1 + (l - 1) * k + v) = system[v].values[t - l];
    for (int v = 0; v < k; ++v) Y(r, v) = system[v].values[t];
  }

  Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success)
    throw Error(Errc::singular_design, "VAR design factorization failed");
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.vectorD().cwiseAbs().minCoeff() < 1e-12 * dmax)
    throw Error(Errc::singular_design, "VAR design matrix is singular");

  Eigen::MatrixXd beta = ldlt.solve(X.transpose() * Y);  // ncols x k
  Eigen::MatrixXd resid = Y - X * beta;                  // t_eff x k

  VarModel m;
  for (const auto& s : system) m.variables.push_back(s.name);
  m.lag = p;
  m.t_effective = t_eff;
  m.coefficients = beta.transpose();
  m.sigma = resid.transpose() * resid / static_cast<double>(t_eff);
  m.xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(ncols, ncols));
  m.eq_sigma2.resize(k);
  for (int v = 0; v < k; ++v)
    m.eq_sigma2(v) = resid.col(v).squaredNorm() / (t_eff - ncols);

  std::vector<Period> stamps(system[0].timestamps.begin() + p,
                             system[0].timestamps.end());
  for (int v = 0; v < k; ++v) {
    Series r;
    r.name = system[v].name + "_resid";
    r.timestamps = stamps;
    r.frequency = system[v].frequency;
    r.values.assign(resid.col(v).data(), resid.col(v).data() + t_eff);
    m.residuals.push_back(std::move(r));
  }

  Eigen::LLT<Eigen::MatrixXd> sig_llt(m.sigma);
  double log_det;
  if (sig_llt.info() == Eigen::Success) {
    log_det = 2.0 * sig_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  } else {
    throw Error(Errc::singular_design, "VAR residual covariance not positive definite");
  }
  const int n_par = k * ncols;
  m.aic = log_det + 2.0 * n_par / t_eff;
  m.bic = log_det + std::log(static_cast<double>(t_eff)) * n_par / t_eff;
  return m;
}

int select_lag(const std::vector<Series>& system, int max_p,
               InfoCriterion criterion) {
  if (max_p < 1) throw Error(Errc::invalid_argument, "max_p must be >= 1");
  int best_p = 1;
  double best_ic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= max_p; ++p) {
    VarModel m = fit_var(system, p);
    const double ic = criterion == InfoCriterion::AIC ? m.aic : m.bic;
    if (ic < best_ic) {
      best_ic = ic;
      best_p = p;
    }
  }
  return best_p;
}

GrangerTestResult granger_wald(const VarModel& model, const std::string& cause,
                               const std::string& effect) {
  const int ci = variable_index(model, cause);
  const int ei = variable_index(model, effect);
  if (ci == ei)
    throw Error(Errc::invalid_argument, "cause and effect must differ");
  const int k = static_cast<int>(model.variables.size());
  const int p = model.lag;

  Eigen::VectorXd b(p);
  Eigen::MatrixXd v(p, p);
  std::vector<int> idx(p);
  for (int l = 0; l < p; ++l) idx[l] = 1 + l * k + ci;
  for (int a = 0; a < p; ++a) {
    b(a) = model.coefficients(ei, idx[a]);
    for (int c = 0; c < p; ++c)
      v(a, c) = model.eq_sigma2(ei) * model.xtx_inv(idx[a], idx[c]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::singular_design, "Wald covariance block not positive definite");
  const double w = b.dot(llt.solve(b));

  GrangerTestResult out;
  out.cause = cause;
  out.effect = effect;
  out.chi_sq = w;
  out.lag = p;
  out.p_value = stats::chi2_sf(w, p);
  out.decision = out.p_value <= 0.10;
  return out;
}

}  // namespace qcv
