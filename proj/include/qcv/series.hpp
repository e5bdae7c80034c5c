#pragma once

#include <compare>
#include <string>
#include <vector>

namespace qcv {

/// Monthly period (year, month). The toolkit works on gap-free monthly data;
/// the frequency enum on Series is the extension point for anything else.
struct Period {
  int year = 0;
  int month = 0;  // 1..12

  auto operator<=>(const Period&) const = default;

  Period next() const { return month == 12 ? Period{year + 1, 1} : Period{year, month + 1}; }
  std::string str() const;  // "YYYY-MM"
};

enum class Frequency { monthly };

/// Ordered, timestamped sequence of real observations. Immutable by
/// convention: every operation returns a new Series.
struct Series {
  std::string name;
  std::vector<Period> timestamps;
  std::vector<double> values;
  Frequency frequency = Frequency::monthly;

  std::size_t size() const { return values.size(); }

  /// Enforces the type invariants: strictly increasing gap-free timestamps,
  /// finite values, length >= 1. Throws on violation.
  void validate() const;

  /// Convenience constructor for tests and simulation output: consecutive
  /// months starting at `start`.
  static Series from_values(std::string name, std::vector<double> values,
                            Period start = {2000, 1});
};

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0, median = 0, max = 0, min = 0, std_dev = 0;
  double skewness = 0, kurtosis = 0;
  double jarque_bera_stat = 0, jarque_bera_p = 0;
};

/// real_t = 100 * nominal_t / cpi_t, name suffixed "_real".
Series deflate(const Series& nominal, const Series& cpi);

/// r_t = 100 * (ln s_t - ln s_{t-1}); one observation shorter than input.
Series log_returns(const Series& s);

/// Element-wise natural log; requires strictly positive values.
Series log_levels(const Series& s);

/// Moments, extremes and the Jarque-Bera normality test. Kurtosis is the raw
/// fourth standardized moment (3 under normality); skewness uses the
/// n-denominator moment estimator; JB = n/6 * (S^2 + (K-3)^2/4) with a
/// chi-square(2) p-value.
SummaryStats describe(const Series& s);

/// Spearman rank correlation with average-rank tie handling.
double spearman(const Series& x, const Series& y);

}  // namespace qcv
