#include "qcv/qar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcv/errors.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/quantreg.hpp"

namespace qcv {

QuantileGrid QuantileGrid::deciles() {
  QuantileGrid g;
  g.kind = Kind::deciles;
  for (int i = 1; i <= 9; ++i) g.levels.push_back(i / 10.0);
  return g;
}

QuantileGrid QuantileGrid::vigintiles() {
  QuantileGrid g;
  g.kind = Kind::vigintiles;
  for (int i = 1; i <= 19; ++i) g.levels.push_back(i / 20.0);
  return g;
}

QuantileGrid QuantileGrid::custom(std::vector<double> levels) {
  QuantileGrid g;
  g.kind = Kind::custom;
  g.levels = std::move(levels);
  return g;
}

void QuantileGrid::validate() const {
  if (levels.empty())
    throw Error(Errc::invalid_argument, "quantile grid must be nonempty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0))
      throw Error(Errc::invalid_argument, "grid levels must lie in (0,1)");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw Error(Errc::invalid_argument, "grid levels must be strictly increasing");
  }
}

Eigen::VectorXd QarModel::coefficients(double tau) const {
  for (int j = 0; j < grid.size(); ++j)
    if (grid.levels[j] == tau) return theta.row(j).transpose();
  throw Error(Errc::invalid_argument, "tau not on the fitted grid");
}

double QarModel::predict(const Eigen::VectorXd& lags, int level_index) const {
  double v = theta(level_index, 0);
  for (int i = 0; i < order; ++i) v += theta(level_index, i + 1) * lags(i);
  return v;
}

QarModel fit_qar_values(const std::vector<double>& y, int order,
                        const QuantileGrid& grid, int start_offset) {
  grid.validate();
  if (order < 1 || order > 3)
    throw Error(Errc::invalid_argument, "QAR order must be 1, 2 or 3");
  const int start = start_offset < 0 ? order : start_offset;
  if (start < order)
    throw Error(Errc::invalid_argument, "start_offset below QAR order");
  const int t_len = static_cast<int>(y.size());
  const int n_eff = t_len - start;
  const int n_par = order + 1;
  if (n_eff < std::max(2 * n_par + 4, 12))
    throw Error(Errc::too_short, "QAR sample too short");

  Eigen::MatrixXd x(n_eff, n_par);
  Eigen::VectorXd resp(n_eff);
  for (int r = 0; r < n_eff; ++r) {
    const int t = start + r;
    resp(r) = y[t];
    x(r, 0) = 1.0;
    for (int i = 1; i <= order; ++i) x(r, i) = y[t - i];
  }

  QarModel m;
  m.order = order;
  m.grid = grid;
  m.t_offset = start;
  const int n_tau = grid.size();
  m.theta.resize(n_tau, n_par);
  m.fitted_quantiles.resize(n_eff, n_tau);

  for (int j = 0; j < n_tau; ++j) {
    QuantRegFit fit;
    try {
      fit = quantile_regression(x, resp, grid.levels[j]);
    } catch (const Error& e) {
      if (e.code() == Errc::non_convergence)
        throw Error(Errc::non_convergence,
                    "QAR level " + std::to_string(grid.levels[j]) + ": " + e.what());
      throw;
    }
    m.theta.row(j) = fit.beta.transpose();
    m.fitted_quantiles.col(j) = x * fit.beta;
  }

  // monotone rearrangement across levels at each time point
  for (int r = 0; r < n_eff; ++r) {
    auto row = m.fitted_quantiles.row(r);
    bool sorted = true;
    for (int j = 1; j < n_tau; ++j)
      if (row(j) < row(j - 1)) {
        sorted = false;
        break;
      }
    if (!sorted) {
      std::vector<double> vals(row.begin(), row.end());
      std::sort(vals.begin(), vals.end());
      for (int j = 0; j < n_tau; ++j) row(j) = vals[j];
      m.crossing_repaired = true;
    }
  }

  // diagnostic innovation scale from the median fit
  {
    QuantRegFit med = quantile_regression(x, resp, 0.5);
    const double mad = (resp - x * med.beta).cwiseAbs().mean();
    m.sigma = mad * std::sqrt(std::numbers::pi / 2.0);
  }
  return m;
}

QarModel fit_qar(const Series& y, int order, const QuantileGrid& grid,
                 int start_offset) {
  y.validate();
  if (static_cast<int>(y.values.size()) < 10 * (order + 2))
    throw Error(Errc::too_short, "QAR needs at least 10*(order+2) observations");
  return fit_qar_values(y.values, order, grid, start_offset);
}

}  // namespace qcv
