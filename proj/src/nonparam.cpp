#include "qcv/nonparam.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/stats.hpp"

namespace qcv {
namespace {

struct Embedded {
  std::vector<double> x;  // standardized cause
  std::vector<double> y;  // standardized effect
  int lag = 1;
  int n = 0;       // number of embedded points
  int offset = 0;  // values index of the first current observation
};

Embedded embed(const Series& cause, const Series& effect, int lag) {
  cause.validate();
  effect.validate();
  if (lag < 1) throw Error(Errc::invalid_argument, "lag must be >= 1");
  if (cause.timestamps != effect.timestamps)
    throw Error(Errc::timestamp_mismatch,
                "cause and effect must share identical timestamps");
  const int t_len = static_cast<int>(cause.values.size());
  if (t_len - lag < 30)
    throw Error(Errc::too_short, "series too short for nonparametric test");

  Embedded e;
  e.lag = lag;
  e.n = t_len - lag;
  e.offset = lag;
  const double sx = std::sqrt(stats::sample_variance(cause.values));
  const double sy = std::sqrt(stats::sample_variance(effect.values));
  if (!(sx > 0.0) || !(sy > 0.0))
    throw Error(Errc::degenerate_distances, "constant series has no scale");
  e.x.resize(t_len);
  e.y.resize(t_len);
  for (int t = 0; t < t_len; ++t) {
    e.x[t] = cause.values[t] / sx;
    e.y[t] = effect.values[t] / sy;
  }
  return e;
}

// Sup-norm closeness of the lag-length histories ending just before the
// current observations of points i and j (0-based embedded indices).
inline bool hist_close(const std::vector<double>& v, const Embedded& e, int i,
                       int j, double eps) {
  const int ti = e.offset + i, tj = e.offset + j;
  for (int l = 1; l <= e.lag; ++l)
    if (std::abs(v[ti - l] - v[tj - l]) > eps) return false;
  return true;
}

int hac_bandwidth(int n) {
  return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.25)));
}

}  // namespace

NonparamCausalityResult hj_test(const Series& cause, const Series& effect,
                                int lag, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::degenerate_epsilon, "eps must be > 0");
  Embedded e = embed(cause, effect, lag);
  const int n = e.n;

  // Pair correlation integrals: C1 = (x-hist, y-hist, y-lead), C2 = (x-hist,
  // y-hist), C3 = (y-hist, y-lead), C4 = (y-hist). Leave-one-out sums feed
  // the delta-method variance.
  std::vector<double> f1(n, 0.0), f2(n, 0.0), f3(n, 0.0), f4(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool iy = hist_close(e.y, e, i, j, eps);
      if (!iy) continue;
      const bool ix = hist_close(e.x, e, i, j, eps);
      const bool iz =
          std::abs(e.y[e.offset + i] - e.y[e.offset + j]) <= eps;
      f4[i] += 1.0;
      f4[j] += 1.0;
      if (ix) {
        f2[i] += 1.0;
        f2[j] += 1.0;
      }
      if (iz) {
        f3[i] += 1.0;
        f3[j] += 1.0;
      }
      if (ix && iz) {
        f1[i] += 1.0;
        f1[j] += 1.0;
      }
    }
  }
  const double scale = 1.0 / (n - 1);
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (int i = 0; i < n; ++i) {
    f1[i] *= scale;
    f2[i] *= scale;
    f3[i] *= scale;
    f4[i] *= scale;
    c1 += f1[i];
    c2 += f2[i];
    c3 += f3[i];
    c4 += f4[i];
  }
  c1 /= n;
  c2 /= n;
  c3 /= n;
  c4 /= n;
  if (c2 < 1e-12 || c4 < 1e-12)
    throw Error(Errc::degenerate_distances,
                "no close pairs at this bandwidth; HJ ratio undefined");

  const double statistic = c1 / c2 - c3 / c4;
  const double g1 = 1.0 / c2;
  const double g2 = -c1 / (c2 * c2);
  const double g3 = -1.0 / c4;
  const double g4 = c3 / (c4 * c4);
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i)
    u[i] = 2.0 * (g1 * (f1[i] - c1) + g2 * (f2[i] - c2) + g3 * (f3[i] - c3) +
                  g4 * (f4[i] - c4));
  const double lrv = stats::long_run_variance(u, hac_bandwidth(n));
  if (!(lrv > 0.0))
    throw Error(Errc::degenerate_distances, "degenerate HJ variance");

  NonparamCausalityResult out;
  out.test = "HJ";
  out.cause = cause.name;
  out.effect = effect.name;
  out.lag = lag;
  out.epsilon = eps;
  out.statistic = std::sqrt(static_cast<double>(n)) * statistic / std::sqrt(lrv);
  out.p_value = 1.0 - stats::norm_cdf(out.statistic);
  return out;
}

NonparamCausalityResult dp_test(const Series& cause, const Series& effect,
                                int lag, std::optional<double> eps_opt) {
  Embedded e = embed(cause, effect, lag);
  const int n = e.n;
  const double eps =
      eps_opt.value_or(std::max(1.5, 7.5 * std::pow(n, -2.0 / 7.0)));
  if (!(eps > 0.0)) throw Error(Errc::degenerate_epsilon, "eps must be > 0");

  // Neighbor counts per point for the four marginals entering T_n.
  std::vector<double> n_xyz(n, 0.0), n_xy(n, 0.0), n_yz(n, 0.0), n_y(n, 0.0);
  auto indicators = [&](int i, int j, bool& iy, bool& ixy, bool& iyz,
                        bool& ixyz) {
    iy = hist_close(e.y, e, i, j, eps);
    if (!iy) {
      ixy = iyz = ixyz = false;
      return;
    }
    const bool ix = hist_close(e.x, e, i, j, eps);
    const bool iz = std::abs(e.y[e.offset + i] - e.y[e.offset + j]) <= eps;
    ixy = ix;
    iyz = iz;
    ixyz = ix && iz;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool iy, ixy, iyz, ixyz;
      indicators(i, j, iy, ixy, iyz, ixyz);
      if (!iy) continue;
      n_y[i] += 1.0;
      n_y[j] += 1.0;
      if (ixy) {
        n_xy[i] += 1.0;
        n_xy[j] += 1.0;
      }
      if (iyz) {
        n_yz[i] += 1.0;
        n_yz[j] += 1.0;
      }
      if (ixyz) {
        n_xyz[i] += 1.0;
        n_xyz[j] += 1.0;
      }
    }
  }

  // U-statistic projection: r_i averages the symmetrized third-order kernel
  // over triples containing i. a_i keeps i as the conditioning point, b_i
  // covers the two symmetric pair slots.
  const double denom = static_cast<double>(n - 1) * (n - 2);
  std::vector<double> a(n), b(n, 0.0);
  for (int i = 0; i < n; ++i)
    a[i] = (n_xyz[i] * n_y[i] - n_xy[i] * n_yz[i]) / denom;

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool iy, ixy, iyz, ixyz;
      indicators(i, j, iy, ixy, iyz, ixyz);
      if (!iy) continue;
      // contribution of center c=j to b_i and center c=i to b_j
      b[i] += 0.5 * ((ixyz ? n_y[j] : 0.0) + n_xyz[j] - (ixy ? n_yz[j] : 0.0) -
                     (iyz ? n_xy[j] : 0.0));
      b[j] += 0.5 * ((ixyz ? n_y[i] : 0.0) + n_xyz[i] - (ixy ? n_yz[i] : 0.0) -
                     (iyz ? n_xy[i] : 0.0));
    }
  }

  std::vector<double> r(n);
  double t_n = 0.0;
  for (int i = 0; i < n; ++i) {
    r[i] = (a[i] + 2.0 * b[i] / denom) / 3.0;
    t_n += r[i];
  }
  t_n /= n;

  const double lrv = stats::long_run_variance(r, hac_bandwidth(n));
  if (!(lrv > 0.0))
    throw Error(Errc::degenerate_distances, "degenerate DP variance");

  NonparamCausalityResult out;
  out.test = "DP";
  out.cause = cause.name;
  out.effect = effect.name;
  out.lag = lag;
  out.epsilon = eps;
  out.statistic = std::sqrt(static_cast<double>(n)) * t_n / (3.0 * std::sqrt(lrv));
  out.p_value = 1.0 - stats::norm_cdf(out.statistic);
  return out;
}

}  // namespace qcv
