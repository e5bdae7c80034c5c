#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qcv/qar.hpp"
#include "qcv/series.hpp"

namespace qcv {

struct SubsamplingConfig {
  double k = 5.0;  // block constant in b = floor(k T^{2/5})
  std::uint64_t seed = 0;

  int block_length(int t_len) const;
};

struct SubsampleDetail {
  double p_value = 1.0;
  double statistic_full = 0.0;
  double mean_subsample_statistic = 0.0;  // diagnostic, not a p-value
  int block_length = 0;
  int n_blocks = 0;
};

/// Granger-causality-in-quantiles statistic: builds the QAR(order) fit of y,
/// evaluates check-function residual signs psi_{t,j} on the grid, and
/// aggregates them through a Gaussian-kernel weight matrix over the joint
/// standardized information vector (y lags up to qar_order, z lags up to
/// q_lags). Large values reject "z does not cause y in quantiles".
double st_statistic(const Series& y, const Series& z, int qar_order,
                    const QuantileGrid& grid, int q_lags);

/// Subsampling p-value: S_T on the full sample versus B = T - b + 1
/// overlapping blocks of length b, QAR re-estimated per block.
double subsample_pvalue(const Series& y, const Series& z, int qar_order,
                        const QuantileGrid& grid, int q_lags,
                        const SubsamplingConfig& cfg);
SubsampleDetail subsample_detail(const Series& y, const Series& z,
                                 int qar_order, const QuantileGrid& grid,
                                 int q_lags, const SubsamplingConfig& cfg);

struct CausalityCell {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct CausalityQuantileResult {
  std::string cause;
  std::string effect;
  std::pair<double, double> joint_interval{0.1, 0.9};
  std::map<int, CausalityCell> joint;                      // lag -> joint test
  std::map<int, std::map<double, CausalityCell>> per_tau;  // lag -> tau -> cell
};

/// One subsampling p-value per (lag, grid cell) with lags 1..3: the joint
/// cell uses the full decile grid in a single statistic, each decile gets a
/// one-point grid. z is the candidate cause, y the effect.
CausalityQuantileResult causality_table(const Series& y, const Series& z,
                                        const SubsamplingConfig& cfg,
                                        const std::vector<int>& lags = {1, 2, 3});

struct AugmentedQarResult {
  std::vector<double> taus;
  std::vector<double> beta;  // coefficient on z_{t-1}
  std::vector<double> lo;    // 95% studentized bootstrap band
  std::vector<double> hi;
  bool collinear = false;
  int bootstrap_replicates = 0;
  int block_length = 0;
};

/// Quantile regression of y_t on three own lags plus z_{t-1}; bands from a
/// moving-block bootstrap. Collinear designs are flagged, not fatal.
AugmentedQarResult augmented_qar(const Series& y, const Series& z,
                                 const QuantileGrid& grid,
                                 int bootstrap_replicates = 500,
                                 std::uint64_t seed = 0);

}  // namespace qcv
