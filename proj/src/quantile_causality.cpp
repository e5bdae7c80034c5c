#include "qcv/quantile_causality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/math/stats.hpp"
#include "qcv/quantreg.hpp"

namespace qcv {
namespace {

void check_pair(const Series& y, const Series& z) {
  y.validate();
  z.validate();
  if (y.values.size() != z.values.size())
    throw Error(Errc::length_mismatch, "y and z must have equal length");
  if (y.timestamps != z.timestamps)
    throw Error(Errc::timestamp_mismatch, "y and z must share timestamps");
}

// S_T on raw windows; series validation happens at the public entry points.
double st_statistic_values(const std::vector<double>& y,
                           const std::vector<double>& z, int qar_order,
                           const QuantileGrid& grid, int q_lags) {
  if (q_lags < 1) throw Error(Errc::invalid_argument, "q_lags must be >= 1");
  const int start = std::max(qar_order, q_lags);
  const int t_len = static_cast<int>(y.size());
  const int n_eff = t_len - start;
  QarModel model = fit_qar_values(y, qar_order, grid, start);

  const int n_tau = grid.size();
  // psi_{t,j} = 1{y_t <= fitted quantile} - tau_j
  Eigen::MatrixXd psi(n_eff, n_tau);
  for (int r = 0; r < n_eff; ++r) {
    const double yt = y[start + r];
    for (int j = 0; j < n_tau; ++j)
      psi(r, j) = (yt <= model.fitted_quantiles(r, j) ? 1.0 : 0.0) -
                  grid.levels[j];
  }

  // standardized information vectors (y lags, z lags); constant components
  // carry no information and are dropped
  const int dim = qar_order + q_lags;
  Eigen::MatrixXd info(n_eff, dim);
  for (int r = 0; r < n_eff; ++r) {
    const int t = start + r;
    for (int i = 0; i < qar_order; ++i) info(r, i) = y[t - 1 - i];
    for (int i = 0; i < q_lags; ++i) info(r, qar_order + i) = z[t - 1 - i];
  }
  // All reductions below run in fixed scalar order (no SIMD reassociation)
  // so the statistic is bit-reproducible against a plain-loop oracle.
  for (int c = 0; c < dim; ++c) {
    double mu = 0.0;
    for (int r = 0; r < n_eff; ++r) mu += info(r, c);
    mu /= n_eff;
    double ss = 0.0;
    for (int r = 0; r < n_eff; ++r) {
      const double d = info(r, c) - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n_eff - 1));
    if (sd < 1e-12)
      for (int r = 0; r < n_eff; ++r) info(r, c) = 0.0;
    else
      for (int r = 0; r < n_eff; ++r) info(r, c) = (info(r, c) - mu) / sd;
  }

  Eigen::MatrixXd w(n_eff, n_eff);
  for (int t = 0; t < n_eff; ++t) {
    w(t, t) = 1.0;
    for (int s = t + 1; s < n_eff; ++s) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double d = info(t, c) - info(s, c);
        d2 += d * d;
      }
      const double v = std::exp(-0.5 * d2);
      w(t, s) = v;
      w(s, t) = v;
    }
  }

  double s_t = 0.0;
  for (int j = 0; j < n_tau; ++j) {
    double q = 0.0;
    for (int t = 0; t < n_eff; ++t) {
      double inner = 0.0;
      for (int s = 0; s < n_eff; ++s) inner += w(t, s) * psi(s, j);
      q += psi(t, j) * inner;
    }
    s_t += std::abs(q);  // Gram kernel keeps q >= 0 up to roundoff
  }
  return s_t / (static_cast<double>(n_eff) * n_tau);
}

}  // namespace

int SubsamplingConfig::block_length(int t_len) const {
  return static_cast<int>(std::floor(k * std::pow(static_cast<double>(t_len), 0.4)));
}

double st_statistic(const Series& y, const Series& z, int qar_order,
                    const QuantileGrid& grid, int q_lags) {
  check_pair(y, z);
  return st_statistic_values(y.values, z.values, qar_order, grid, q_lags);
}

SubsampleDetail subsample_detail(const Series& y, const Series& z,
                                 int qar_order, const QuantileGrid& grid,
                                 int q_lags, const SubsamplingConfig& cfg) {
  check_pair(y, z);
  const int t_len = static_cast<int>(y.values.size());
  const int b = cfg.block_length(t_len);
  if (b >= t_len)
    throw Error(Errc::block_too_short, "subsample block covers the whole sample");
  if (b < 20)
    throw Error(Errc::block_too_short, "subsample block length below 20");
  const int n_blocks = t_len - b + 1;
  if (n_blocks < 50)
    throw Error(Errc::block_too_short, "fewer than 50 subsample blocks");

  SubsampleDetail out;
  out.block_length = b;
  out.n_blocks = n_blocks;
  out.statistic_full =
      st_statistic_values(y.values, z.values, qar_order, grid, q_lags);

  int exceed = 0;
  double sum_stat = 0.0;
  std::vector<double> yb(b), zb(b);
  for (int i = 0; i < n_blocks; ++i) {
    std::copy(y.values.begin() + i, y.values.begin() + i + b, yb.begin());
    std::copy(z.values.begin() + i, z.values.begin() + i + b, zb.begin());
    const double s_b = st_statistic_values(yb, zb, qar_order, grid, q_lags);
    sum_stat += s_b;
    if (s_b >= out.statistic_full) ++exceed;
  }
  out.p_value = static_cast<double>(exceed) / n_blocks;
  out.mean_subsample_statistic = sum_stat / n_blocks;
  return out;
}

double subsample_pvalue(const Series& y, const Series& z, int qar_order,
                        const QuantileGrid& grid, int q_lags,
                        const SubsamplingConfig& cfg) {
  return subsample_detail(y, z, qar_order, grid, q_lags, cfg).p_value;
}

CausalityQuantileResult causality_table(const Series& y, const Series& z,
                                        const SubsamplingConfig& cfg,
                                        const std::vector<int>& lags) {
  CausalityQuantileResult out;
  out.cause = z.name;
  out.effect = y.name;
  const QuantileGrid deciles = QuantileGrid::deciles();
  for (int lag : lags) {
    if (lag < 1 || lag > 3)
      throw Error(Errc::invalid_argument, "causality table lags must be in 1..3");
    SubsampleDetail joint = subsample_detail(y, z, lag, deciles, lag, cfg);
    out.joint[lag] = {joint.statistic_full, joint.p_value};
    for (double tau : deciles.levels) {
      SubsampleDetail cell =
          subsample_detail(y, z, lag, QuantileGrid::custom({tau}), lag, cfg);
      out.per_tau[lag][tau] = {cell.statistic_full, cell.p_value};
    }
  }
  return out;
}

AugmentedQarResult augmented_qar(const Series& y, const Series& z,
                                 const QuantileGrid& grid,
                                 int bootstrap_replicates,
                                 std::uint64_t seed) {
  check_pair(y, z);
  grid.validate();
  const int order = 3;
  const int t_len = static_cast<int>(y.values.size());
  if (t_len < 10 * (order + 2))
    throw Error(Errc::too_short, "augmented QAR needs at least 50 observations");

  const int n_eff = t_len - order;
  const int n_par = order + 2;  // intercept, three y lags, z_{t-1}
  Eigen::MatrixXd x(n_eff, n_par);
  Eigen::VectorXd resp(n_eff);
  for (int r = 0; r < n_eff; ++r) {
    const int t = order + r;
    resp(r) = y.values[t];
    x(r, 0) = 1.0;
    for (int i = 1; i <= order; ++i) x(r, i) = y.values[t - i];
    x(r, order + 1) = z.values[t - 1];
  }

  AugmentedQarResult out;
  out.taus = grid.levels;
  out.bootstrap_replicates = bootstrap_replicates;
  const int block = std::max(
      2, static_cast<int>(std::lround(std::cbrt(static_cast<double>(n_eff)))));
  out.block_length = block;

  std::vector<Eigen::VectorXd> fits;
  for (double tau : grid.levels) {
    QuantRegFit fit;
    try {
      fit = quantile_regression(x, resp, tau);
    } catch (const Error& e) {
      if (e.code() == Errc::singular_design) {
        out.collinear = true;
        return out;
      }
      throw;
    }
    if (!fit.beta.allFinite()) {
      out.collinear = true;
      return out;
    }
    fits.push_back(fit.beta);
    out.beta.push_back(fit.beta(n_par - 1));
  }

  // moving-block bootstrap of the regression rows
  Rng rng(Rng::derive(seed, Rng::stream_of("augmented-qar-bootstrap")));
  const int n_tau = grid.size();
  std::vector<std::vector<double>> boot(n_tau);
  const int n_starts = (n_eff + block - 1) / block;
  Eigen::MatrixXd xb(n_eff, n_par);
  Eigen::VectorXd rb(n_eff);
  for (int rep = 0; rep < bootstrap_replicates; ++rep) {
    int row = 0;
    for (int s = 0; s < n_starts && row < n_eff; ++s) {
      const int st = static_cast<int>(rng.below(n_eff - block + 1));
      for (int o = 0; o < block && row < n_eff; ++o, ++row) {
        xb.row(row) = x.row(st + o);
        rb(row) = resp(st + o);
      }
    }
    for (int j = 0; j < n_tau; ++j) {
      try {
        QuantRegFit fit = quantile_regression(xb, rb, grid.levels[j]);
        if (fit.beta.allFinite()) boot[j].push_back(fit.beta(n_par - 1));
      } catch (const Error&) {
        // degenerate resample; skip
      }
    }
  }

  for (int j = 0; j < n_tau; ++j) {
    if (boot[j].size() < 10) {
      out.lo.push_back(out.beta[j]);
      out.hi.push_back(out.beta[j]);
      continue;
    }
    const double sd = std::sqrt(stats::sample_variance(boot[j]));
    out.lo.push_back(out.beta[j] - 1.959963984540054 * sd);
    out.hi.push_back(out.beta[j] + 1.959963984540054 * sd);
  }
  return out;
}

}  // namespace qcv
