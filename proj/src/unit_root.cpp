#include "qcv/unit_root.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qcv/errors.hpp"
#include "qcv/math/ols.hpp"

namespace qcv {
namespace {

// MacKinnon (2010) response-surface coefficients for the Dickey-Fuller
// t-distribution: cv = b0 + b1/T + b2/T^2 + b3/T^3.
struct RespSurf {
  double b0, b1, b2, b3;
  double at(int t) const {
    const double ti = 1.0 / t;
    return b0 + ti * (b1 + ti * (b2 + ti * b3));
  }
};

constexpr std::array<RespSurf, 3> kMacKinnonC = {{
    {-3.43035, -6.5393, -16.786, -79.433},   // 1%
    {-2.86154, -2.8903, -4.234, -40.040},    // 5%
    {-2.56677, -1.5384, -2.809, 0.0},        // 10%
}};

constexpr std::array<RespSurf, 3> kMacKinnonCT = {{
    {-3.95877, -9.0531, -28.428, -134.155},  // 1%
    {-3.41049, -4.3904, -9.036, -45.374},    // 5%
    {-3.12705, -2.5856, -3.925, -22.380},    // 10%
}};

constexpr std::array<double, 3> kLevels = {0.01, 0.05, 0.10};

std::set<double> decide(double stat, const std::array<double, 3>& cvs) {
  std::set<double> out;
  for (std::size_t i = 0; i < 3; ++i)
    if (stat < cvs[i]) out.insert(kLevels[i]);
  return out;
}

struct DfRegression {
  double t_stat = 0.0;   // t-ratio on the lagged level
  double coef = 0.0;
  double se = 0.0;
  double rss = 0.0;
  int n_obs = 0;
  int n_par = 0;
  Eigen::VectorXd residuals;
};

// Regresses dy_t on deterministics, y_{t-1} and k lagged differences using
// observations t = start_t..T (1-based in the level series). start_t must be
// at least k + 2.
DfRegression df_regression(const std::vector<double>& y, Deterministic det,
                           int k, int start_t) {
  const int t_max = static_cast<int>(y.size());
  const int m = t_max - start_t + 1;
  const int n_det = det == Deterministic::constant ? 1 : 2;
  const int n_par = n_det + 1 + k;
  if (m <= n_par)
    throw Error(Errc::too_short, "insufficient observations for ADF regression");

  Eigen::MatrixXd X(m, n_par);
  Eigen::VectorXd dy(m);
  for (int r = 0; r < m; ++r) {
    const int t = start_t + r;  // 1-based
    dy(r) = y[t - 1] - y[t - 2];
    int c = 0;
    X(r, c++) = 1.0;
    if (det == Deterministic::constant_trend) X(r, c++) = static_cast<double>(t);
    X(r, c++) = y[t - 2];
    for (int j = 1; j <= k; ++j) X(r, c++) = y[t - 1 - j] - y[t - 2 - j];
  }
  OlsFit fit = ols(X, dy);
  const int idx = n_det;  // column of y_{t-1}
  DfRegression out;
  out.coef = fit.beta(idx);
  out.se = fit.se(idx);
  out.t_stat = out.coef / out.se;
  out.rss = fit.rss;
  out.n_obs = m;
  out.n_par = n_par;
  out.residuals = std::move(fit.residuals);
  return out;
}

double info_criterion(double rss, int m, int n_par, InfoCriterion ic) {
  const double penalty = ic == InfoCriterion::AIC ? 2.0 : std::log(m);
  return std::log(rss / m) + penalty * n_par / m;
}

// Bartlett-kernel long-run variance with the given lag truncation; the
// denominator is the raw sample size.
double bartlett_lrv(const Eigen::VectorXd& u, int bw) {
  const int n = static_cast<int>(u.size());
  double lrv = u.squaredNorm() / n;
  for (int j = 1; j <= bw; ++j) {
    double g = 0.0;
    for (int t = j; t < n; ++t) g += u(t) * u(t - j);
    g /= n;
    lrv += 2.0 * (1.0 - static_cast<double>(j) / (bw + 1)) * g;
  }
  return lrv;
}

// Perron (1997) innovational-outlier critical values (break in intercept and
// slope, break date by minimizing the t-statistic), by sample size.
struct PerronRow {
  double t;
  std::array<double, 3> cv;  // 1%, 5%, 10%
};

constexpr std::array<PerronRow, 5> kPerronCv = {{
    {70.0, {-6.32, -5.59, -5.29}},
    {100.0, {-6.21, -5.55, -5.25}},
    {150.0, {-6.16, -5.51, -5.23}},
    {200.0, {-6.12, -5.49, -5.21}},
    {1.0e9, {-5.92, -5.41, -5.15}},
}};

std::array<double, 3> perron_cv(int t_eff) {
  const double t = static_cast<double>(t_eff);
  if (t <= kPerronCv.front().t) return kPerronCv.front().cv;
  for (std::size_t i = 1; i < kPerronCv.size(); ++i) {
    if (t <= kPerronCv[i].t) {
      const double w =
          (t - kPerronCv[i - 1].t) / (kPerronCv[i].t - kPerronCv[i - 1].t);
      std::array<double, 3> out{};
      for (int j = 0; j < 3; ++j)
        out[j] = kPerronCv[i - 1].cv[j] + w * (kPerronCv[i].cv[j] - kPerronCv[i - 1].cv[j]);
      return out;
    }
  }
  return kPerronCv.back().cv;
}

}  // namespace

UnitRootResult adf_test(const Series& s, Deterministic det, int max_lag,
                        InfoCriterion criterion) {
  s.validate();
  if (max_lag < 0) throw Error(Errc::invalid_argument, "max_lag must be >= 0");
  const auto& y = s.values;
  const int t_len = static_cast<int>(y.size());
  const int n_det = det == Deterministic::constant ? 1 : 2;
  if (t_len < max_lag + n_det + 10)
    throw Error(Errc::too_short, "series too short for ADF with max_lag=" +
                                     std::to_string(max_lag));

  int best_lag = 0;
  double best_ic = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= max_lag; ++k) {
    DfRegression reg = df_regression(y, det, k, k + 2);
    const double ic = info_criterion(reg.rss, reg.n_obs, reg.n_par, criterion);
    if (ic < best_ic) {
      best_ic = ic;
      best_lag = k;
    }
  }

  DfRegression reg = df_regression(y, det, best_lag, best_lag + 2);
  const auto& surf = det == Deterministic::constant ? kMacKinnonC : kMacKinnonCT;
  std::array<double, 3> cvs{};
  for (int i = 0; i < 3; ++i) cvs[i] = surf[i].at(reg.n_obs);

  UnitRootResult out;
  out.test = "ADF";
  out.statistic = reg.t_stat;
  out.lag_or_bandwidth = best_lag;
  out.deterministic = det;
  out.reject_at = decide(reg.t_stat, cvs);
  out.criterion_value = best_ic;
  return out;
}

UnitRootResult pp_test(const Series& s, Deterministic det, PpBandwidth bw) {
  s.validate();
  const auto& y = s.values;
  const int t_len = static_cast<int>(y.size());
  if (t_len < 20) throw Error(Errc::too_short, "series too short for PP test");

  DfRegression reg = df_regression(y, det, 0, 2);
  const int m = reg.n_obs;
  int lags = bw.automatic
                 ? static_cast<int>(std::floor(4.0 * std::pow(m / 100.0, 2.0 / 9.0)))
                 : bw.fixed;
  if (lags < 0) throw Error(Errc::invalid_argument, "bandwidth must be >= 0");
  if (lags >= m) throw Error(Errc::invalid_argument, "bandwidth exceeds sample");

  const double s2 = reg.rss / (m - reg.n_par);  // dof-corrected residual variance
  const double gamma0 = reg.rss / m;
  const double lam2 = bartlett_lrv(reg.residuals, lags);
  if (lam2 <= 0.0)
    throw Error(Errc::numeric_failure, "nonpositive long-run variance in PP test");
  const double z_tau = std::sqrt(gamma0 / lam2) * reg.t_stat -
                       m * reg.se * (lam2 - gamma0) /
                           (2.0 * std::sqrt(lam2) * std::sqrt(s2));

  const auto& surf = det == Deterministic::constant ? kMacKinnonC : kMacKinnonCT;
  std::array<double, 3> cvs{};
  for (int i = 0; i < 3; ++i) cvs[i] = surf[i].at(m);

  UnitRootResult out;
  out.test = "PP";
  out.statistic = z_tau;
  out.lag_or_bandwidth = lags;
  out.deterministic = det;
  out.reject_at = decide(z_tau, cvs);
  return out;
}

UnitRootResult perron_break_test(const Series& s, int max_lag) {
  s.validate();
  if (max_lag < 0) throw Error(Errc::invalid_argument, "max_lag must be >= 0");
  const auto& y = s.values;
  const int t_len = static_cast<int>(y.size());
  if (t_len < 50) throw Error(Errc::too_short, "series too short for break test");

  const int tb_lo = std::max(2, static_cast<int>(std::ceil(0.15 * t_len)));
  const int tb_hi = std::min(t_len - 2, static_cast<int>(std::floor(0.85 * t_len)));

  double best_t = std::numeric_limits<double>::infinity();
  int best_tb = -1;
  int best_lag = 0;
  int best_m = 0;

  for (int tb = tb_lo; tb <= tb_hi; ++tb) {
    double cand_ic = std::numeric_limits<double>::infinity();
    double cand_t = 0.0;
    int cand_lag = -1;
    int cand_m = 0;
    for (int k = 0; k <= max_lag; ++k) {
      const int start_t = k + 2;
      const int m = t_len - start_t + 1;
      const int n_par = 5 + 1 + k;  // const, DU, trend, DT, D(Tb), y_{t-1}, lags
      if (m <= n_par + 2) continue;

      Eigen::MatrixXd X(m, n_par);
      Eigen::VectorXd lhs(m);
      for (int r = 0; r < m; ++r) {
        const int t = start_t + r;  // 1-based
        lhs(r) = y[t - 1];
        int c = 0;
        X(r, c++) = 1.0;
        X(r, c++) = t > tb ? 1.0 : 0.0;                          // DU
        X(r, c++) = static_cast<double>(t);                      // trend
        X(r, c++) = t > tb ? static_cast<double>(t - tb) : 0.0;  // DT
        X(r, c++) = t == tb + 1 ? 1.0 : 0.0;                     // one-off pulse
        X(r, c++) = y[t - 2];
        for (int j = 1; j <= k; ++j) X(r, c++) = y[t - 1 - j] - y[t - 2 - j];
      }
      OlsFit fit;
      try {
        fit = ols(X, lhs);
      } catch (const Error&) {
        continue;  // dummy collinear with trend at extreme candidates
      }
      const int idx = 5;
      const double tstat = (fit.beta(idx) - 1.0) / fit.se(idx);
      const double ic = info_criterion(fit.rss, m, n_par, InfoCriterion::SIC);
      if (ic < cand_ic) {
        cand_ic = ic;
        cand_t = tstat;
        cand_lag = k;
        cand_m = m;
      }
    }
    if (cand_lag >= 0 && cand_t < best_t) {
      best_t = cand_t;
      best_tb = tb;
      best_lag = cand_lag;
      best_m = cand_m;
    }
  }
  if (best_tb < 0)
    throw Error(Errc::numeric_failure, "no admissible break candidate");

  UnitRootResult out;
  out.test = "Perron";
  out.statistic = best_t;
  out.lag_or_bandwidth = best_lag;
  out.deterministic = Deterministic::constant_trend;
  out.reject_at = decide(best_t, perron_cv(best_m));
  out.break_date = s.timestamps[best_tb - 1];
  return out;
}

}  // namespace qcv
