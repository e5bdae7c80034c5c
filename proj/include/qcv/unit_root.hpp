#pragma once

#include <optional>
#include <set>
#include <string>

#include "qcv/series.hpp"

namespace qcv {

enum class Deterministic { constant, constant_trend };
enum class InfoCriterion { SIC, AIC };

struct UnitRootResult {
  std::string test;  // "ADF", "PP", "Perron"
  double statistic = 0.0;
  int lag_or_bandwidth = 0;
  Deterministic deterministic = Deterministic::constant;
  std::optional<double> p_value;       // decisions use critical values
  std::set<double> reject_at;          // subset of {0.01, 0.05, 0.10}
  std::optional<Period> break_date;    // Perron only
  double criterion_value = 0.0;        // value of the selected IC (ADF)
};

/// Augmented Dickey-Fuller with information-criterion lag selection over
/// 0..max_lag (each candidate on its own maximal sample; ties go to the
/// smaller lag). Decision against MacKinnon response-surface critical values.
UnitRootResult adf_test(const Series& s, Deterministic det, int max_lag,
                        InfoCriterion criterion = InfoCriterion::SIC);

struct PpBandwidth {
  bool automatic = true;  // Newey-West rule floor(4 (T/100)^{2/9})
  int fixed = 0;

  static PpBandwidth newey_west_auto() { return {}; }
  static PpBandwidth fixed_lags(int n) { return {false, n}; }
};

/// Phillips-Perron Z_tau with a Bartlett-kernel long-run variance.
UnitRootResult pp_test(const Series& s, Deterministic det, PpBandwidth bw = {});

/// Perron (1997) innovational-outlier unit-root test with one break in both
/// intercept and trend at an unknown date. The break is chosen over the
/// central 70% of the sample to minimize the unit-root t-statistic; lags per
/// candidate by SIC over 0..max_lag.
UnitRootResult perron_break_test(const Series& s, int max_lag = 6);

}  // namespace qcv
