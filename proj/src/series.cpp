#include "qcv/series.hpp"

#include <cmath>
#include <cstdio>

#include "qcv/errors.hpp"
#include "qcv/math/stats.hpp"

namespace qcv {

std::string Period::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

void Series::validate() const {
  if (values.empty()) throw Error(Errc::too_short, "series '" + name + "' is empty");
  if (timestamps.size() != values.size())
    throw Error(Errc::length_mismatch, "series '" + name + "': timestamps vs values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(Errc::nonpositive_value,
                  "series '" + name + "': non-finite value at " + timestamps[i].str());
    if (i > 0 && timestamps[i] != timestamps[i - 1].next())
      throw Error(Errc::timestamp_mismatch, "series '" + name + "': gap or disorder at " +
                                                timestamps[i].str());
  }
}

Series Series::from_values(std::string name, std::vector<double> values, Period start) {
  Series s;
  s.name = std::move(name);
  s.values = std::move(values);
  s.timestamps.reserve(s.values.size());
  Period p = start;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    s.timestamps.push_back(p);
    p = p.next();
  }
  return s;
}

Series deflate(const Series& nominal, const Series& cpi) {
  if (nominal.timestamps != cpi.timestamps)
    throw Error(Errc::timestamp_mismatch,
                "deflate: '" + nominal.name + "' vs '" + cpi.name + "' ranges differ");
  Series out = nominal;
  out.name = nominal.name + "_real";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (cpi.values[i] <= 0.0)
      throw Error(Errc::nonpositive_deflator,
                  "deflate: cpi <= 0 at " + cpi.timestamps[i].str() + " (index " +
                      std::to_string(i) + ")");
    out.values[i] = 100.0 * nominal.values[i] / cpi.values[i];
  }
  return out;
}

Series log_returns(const Series& s) {
  if (s.size() < 2) throw Error(Errc::too_short, "log_returns: need at least 2 observations");
  Series out;
  out.name = s.name + "_ret";
  out.frequency = s.frequency;
  out.timestamps.assign(s.timestamps.begin() + 1, s.timestamps.end());
  out.values.resize(s.size() - 1);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.values[i] <= 0.0)
      throw Error(Errc::nonpositive_value,
                  "log_returns: value <= 0 at index " + std::to_string(i));
  for (std::size_t i = 1; i < s.size(); ++i)
    out.values[i - 1] = 100.0 * (std::log(s.values[i]) - std::log(s.values[i - 1]));
  return out;
}

Series log_levels(const Series& s) {
  Series out = s;
  out.name = s.name + "_log";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.values[i] <= 0.0)
      throw Error(Errc::nonpositive_value, "log: value <= 0 at index " + std::to_string(i));
    out.values[i] = std::log(s.values[i]);
  }
  return out;
}

SummaryStats describe(const Series& s) {
  if (s.size() < 4) throw Error(Errc::too_short, "describe: need at least 4 observations");
  const auto& v = s.values;
  SummaryStats st;
  st.n = v.size();
  st.mean = stats::mean(v);
  st.median = stats::median(v);
  st.max = *std::max_element(v.begin(), v.end());
  st.min = *std::min_element(v.begin(), v.end());
  st.std_dev = stats::std_dev(v);
  st.skewness = stats::skewness(v);
  st.kurtosis = stats::kurtosis(v);
  const double n = static_cast<double>(st.n);
  st.jarque_bera_stat =
      n / 6.0 * (st.skewness * st.skewness + 0.25 * std::pow(st.kurtosis - 3.0, 2));
  st.jarque_bera_p = stats::chi2_sf(st.jarque_bera_stat, 2.0);
  return st;
}

double spearman(const Series& x, const Series& y) {
  if (x.size() != y.size()) throw Error(Errc::length_mismatch, "spearman: unequal lengths");
  if (x.size() < 3) throw Error(Errc::too_short, "spearman: need at least 3 observations");
  const auto rx = stats::ranks_average(x.values);
  const auto ry = stats::ranks_average(y.values);
  return stats::correlation(rx, ry);
}

}  // namespace qcv
