#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qcv/errors.hpp"
#include "qcv/math/rng.hpp"
#include "qcv/qar.hpp"
#include "qcv/quantile_causality.hpp"
#include "qcv/series.hpp"
#include "support/helpers.hpp"

using namespace qcv;
using qcv::test::ar1;
using qcv::test::independent_ar1_pair;
using qcv::test::lower_tail_causal_pair;

namespace {

/// Plain-loop reconstruction of S_T sharing only the QAR fit, written to run
/// every reduction in the same scalar order as the library.
double st_oracle(const std::vector<double>& y, const std::vector<double>& z,
                 int qar_order, const QuantileGrid& grid, int q_lags) {
  const int start = std::max(qar_order, q_lags);
  const int t_len = static_cast<int>(y.size());
  const int n_eff = t_len - start;
  QarModel model = fit_qar_values(y, qar_order, grid, start);
  const int n_tau = grid.size();

  std::vector<std::vector<double>> psi(
      static_cast<std::size_t>(n_eff),
      std::vector<double>(static_cast<std::size_t>(n_tau)));
  for (int r = 0; r < n_eff; ++r)
    for (int j = 0; j < n_tau; ++j)
      psi[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
          (y[static_cast<std::size_t>(start + r)] <= model.fitted_quantiles(r, j)
               ? 1.0
               : 0.0) -
          grid.levels[static_cast<std::size_t>(j)];

  const int dim = qar_order + q_lags;
  std::vector<std::vector<double>> info(
      static_cast<std::size_t>(n_eff),
      std::vector<double>(static_cast<std::size_t>(dim)));
  for (int r = 0; r < n_eff; ++r) {
    const int t = start + r;
    for (int i = 0; i < qar_order; ++i)
      info[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] =
          y[static_cast<std::size_t>(t - 1 - i)];
    for (int i = 0; i < q_lags; ++i)
      info[static_cast<std::size_t>(r)][static_cast<std::size_t>(qar_order + i)] =
          z[static_cast<std::size_t>(t - 1 - i)];
  }
  for (int c = 0; c < dim; ++c) {
    double mu = 0.0;
    for (int r = 0; r < n_eff; ++r)
      mu += info[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    mu /= n_eff;
    double ss = 0.0;
    for (int r = 0; r < n_eff; ++r) {
      const double d =
          info[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n_eff - 1));
    for (int r = 0; r < n_eff; ++r) {
      auto& v = info[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      v = sd < 1e-12 ? 0.0 : (v - mu) / sd;
    }
  }

  std::vector<std::vector<double>> w(
      static_cast<std::size_t>(n_eff),
      std::vector<double>(static_cast<std::size_t>(n_eff)));
  for (int t = 0; t < n_eff; ++t) {
    w[static_cast<std::size_t>(t)][static_cast<std::size_t>(t)] = 1.0;
    for (int s = t + 1; s < n_eff; ++s) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double d =
            info[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] -
            info[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
        d2 += d * d;
      }
      const double v = std::exp(-0.5 * d2);
      w[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = v;
      w[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] = v;
    }
  }

  double s_t = 0.0;
  for (int j = 0; j < n_tau; ++j) {
    double q = 0.0;
    for (int t = 0; t < n_eff; ++t) {
      double inner = 0.0;
      for (int s = 0; s < n_eff; ++s)
        inner += w[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] *
                 psi[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
      q += psi[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] * inner;
    }
    s_t += std::abs(q);
  }
  return s_t / (static_cast<double>(n_eff) * n_tau);
}

Series window(const Series& s, int from, int len) {
  return Series::from_values(
      s.name, std::vector<double>(s.values.begin() + from,
                                  s.values.begin() + from + len));
}

}  // namespace

TEST_CASE("statistic equals the plain-loop oracle bit for bit") {
  const std::vector<QuantileGrid> grids{
      QuantileGrid::deciles(), QuantileGrid::custom({0.1, 0.5, 0.9}),
      QuantileGrid::custom({0.5})};
  int checked = 0;
  for (int inst = 0; inst < 24; ++inst) {
    const int t_len = 26 + inst % 7;
    const int qar_order = 1 + inst % 2;
    const int q_lags = 1 + (inst / 2) % 2;
    const auto& grid = grids[static_cast<std::size_t>(inst) % grids.size()];
    auto [ys, zs] = independent_ar1_pair(0.3, t_len, 500 + inst);

    const double lib = st_statistic(ys, zs, qar_order, grid, q_lags);
    const double oracle = st_oracle(ys.values, zs.values, qar_order, grid, q_lags);
    CHECK(lib == oracle);  // exact, not approximate
    CHECK(lib >= 0.0);
    ++checked;
  }
  CHECK(checked == 24);
}

TEST_CASE("block length follows the floor rule") {
  SubsamplingConfig cfg;
  CHECK(cfg.block_length(500) ==
        static_cast<int>(std::floor(5.0 * std::pow(500.0, 0.4))));
  CHECK(cfg.block_length(500) == 60);
  CHECK(cfg.block_length(120) == 33);
  CHECK(cfg.block_length(300) == 48);
  SubsamplingConfig small;
  small.k = 3.5;
  CHECK(small.block_length(500) == 42);
}

TEST_CASE("subsample detail reconstructs from the block statistics") {
  auto [ys, zs] = independent_ar1_pair(0.3, 120, 42);
  const QuantileGrid grid = QuantileGrid::custom({0.25, 0.5, 0.75});
  SubsamplingConfig cfg;
  SubsampleDetail detail = subsample_detail(ys, zs, 1, grid, 1, cfg);

  CHECK(detail.block_length == 33);
  CHECK(detail.n_blocks == 120 - 33 + 1);
  CHECK(detail.statistic_full == st_statistic(ys, zs, 1, grid, 1));

  int exceed = 0;
  double mean_stat = 0.0;
  for (int i = 0; i < detail.n_blocks; ++i) {
    const double s_b =
        st_statistic(window(ys, i, 33), window(zs, i, 33), 1, grid, 1);
    mean_stat += s_b;
    if (s_b >= detail.statistic_full) ++exceed;
  }
  mean_stat /= detail.n_blocks;
  CHECK(detail.p_value == static_cast<double>(exceed) / detail.n_blocks);
  CHECK(detail.mean_subsample_statistic == doctest::Approx(mean_stat).epsilon(1e-12));
  CHECK(subsample_pvalue(ys, zs, 1, grid, 1, cfg) == detail.p_value);
}

TEST_CASE("independent pairs rarely reject, tail causality is caught") {
  SubsamplingConfig cfg;
  int size_rejections = 0;
  for (int seed = 0; seed < 6; ++seed) {
    auto [ys, zs] = independent_ar1_pair(0.3, 160, 900 + seed);
    if (subsample_pvalue(ys, zs, 1, QuantileGrid::deciles(), 1, cfg) <= 0.05)
      ++size_rejections;
  }
  CHECK(size_rejections <= 2);

  const QuantileGrid lower = QuantileGrid::custom({0.1, 0.2, 0.3});
  int power_rejections = 0;
  for (int seed = 0; seed < 6; ++seed) {
    auto [ys, zs] = lower_tail_causal_pair(280, 950 + seed);
    if (subsample_pvalue(ys, zs, 1, lower, 1, cfg) <= 0.10) ++power_rejections;
  }
  CHECK(power_rejections >= 4);
}

TEST_CASE("causality table covers joint and per-decile cells") {
  auto [ys, zs] = independent_ar1_pair(0.3, 140, 77);
  SubsamplingConfig cfg;
  CausalityQuantileResult table = causality_table(ys, zs, cfg, {1});

  CHECK(table.cause == "z");
  CHECK(table.effect == "y");
  REQUIRE(table.joint.count(1) == 1);
  REQUIRE(table.per_tau.count(1) == 1);
  CHECK(table.per_tau.at(1).size() == 9);

  SubsampleDetail joint = subsample_detail(ys, zs, 1, QuantileGrid::deciles(), 1, cfg);
  CHECK(table.joint.at(1).statistic == joint.statistic_full);
  CHECK(table.joint.at(1).p_value == joint.p_value);
  for (const auto& [tau, cell] : table.per_tau.at(1)) {
    CHECK(cell.p_value >= 0.0);
    CHECK(cell.p_value <= 1.0);
    SubsampleDetail one =
        subsample_detail(ys, zs, 1, QuantileGrid::custom({tau}), 1, cfg);
    CHECK(cell.statistic == one.statistic_full);
  }

  CHECK_THROWS_AS(causality_table(ys, zs, cfg, {4}), Error);
}

TEST_CASE("augmented QAR reports bands and flags collinear designs") {
  auto [ys, zs] = lower_tail_causal_pair(400, 33);
  const QuantileGrid grid = QuantileGrid::custom({0.1, 0.5, 0.9});
  AugmentedQarResult res = augmented_qar(ys, zs, grid, 60, 5);

  CHECK_FALSE(res.collinear);
  CHECK(res.taus == grid.levels);
  REQUIRE(res.beta.size() == 3);
  REQUIRE(res.lo.size() == 3);
  REQUIRE(res.hi.size() == 3);
  const int n_eff = 400 - 3;
  CHECK(res.block_length ==
        std::max(2, static_cast<int>(std::lround(std::cbrt(
                        static_cast<double>(n_eff))))));
  CHECK(res.bootstrap_replicates == 60);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::isfinite(res.beta[j]));
    CHECK(res.lo[j] <= res.beta[j]);
    CHECK(res.hi[j] >= res.beta[j]);
    CHECK(res.hi[j] > res.lo[j]);
  }

  AugmentedQarResult rerun = augmented_qar(ys, zs, grid, 60, 5);
  CHECK(rerun.beta == res.beta);
  CHECK(rerun.lo == res.lo);
  CHECK(rerun.hi == res.hi);

  Series flat = Series::from_values("z", std::vector<double>(400, 1.0));
  AugmentedQarResult degenerate = augmented_qar(ys, flat, grid, 20, 5);
  CHECK(degenerate.collinear);
}

TEST_CASE("invalid inputs throw") {
  auto [ys, zs] = independent_ar1_pair(0.3, 120, 5);
  SubsamplingConfig cfg;
  Series shorter = window(zs, 0, 100);
  CHECK_THROWS_AS(st_statistic(ys, shorter, 1, QuantileGrid::deciles(), 1), Error);

  Series shifted = Series::from_values("z", zs.values, Period{2001, 5});
  CHECK_THROWS_AS(st_statistic(ys, shifted, 1, QuantileGrid::deciles(), 1), Error);
  CHECK_THROWS_AS(st_statistic(ys, zs, 1, QuantileGrid::deciles(), 0), Error);

  auto [sy, sz] = independent_ar1_pair(0.3, 60, 6);
  CHECK_THROWS_AS(subsample_pvalue(sy, sz, 1, QuantileGrid::deciles(), 1, cfg),
                  Error);
  auto [ty, tz] = independent_ar1_pair(0.3, 20, 7);
  CHECK_THROWS_AS(subsample_pvalue(ty, tz, 1, QuantileGrid::deciles(), 1, cfg),
                  Error);

  auto [ay, az] = independent_ar1_pair(0.3, 40, 8);
  CHECK_THROWS_AS(augmented_qar(ay, az, QuantileGrid::deciles(), 10, 1), Error);
}
