#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qcv/math/rng.hpp"
#include "qcv/series.hpp"

namespace qcv::test {

/// Stationary AR(1) with N(0, innov_sd^2) innovations, exact stationary start.
inline Series ar1(double coef, int t_len, std::uint64_t seed, double innov_sd = 1.0,
                  const std::string& name = "ar1") {
  Rng rng(seed);
  double sd0 = innov_sd / std::sqrt(1.0 - coef * coef);
  std::vector<double> x(static_cast<std::size_t>(t_len));
  double prev = rng.normal(0.0, sd0);
  for (int t = 0; t < t_len; ++t) {
    prev = coef * prev + rng.normal(0.0, innov_sd);
    x[static_cast<std::size_t>(t)] = prev;
  }
  return Series::from_values(name, std::move(x));
}

/// Two mutually independent AR(1) processes sharing nothing but the seed root.
inline std::pair<Series, Series> independent_ar1_pair(double coef, int t_len,
                                                      std::uint64_t seed) {
  return {ar1(coef, t_len, Rng::derive(seed, 1), 1.0, "y"),
          ar1(coef, t_len, Rng::derive(seed, 2), 1.0, "z")};
}

/// Tail-causal DGP: y_t = 0.8 z_{t-1} 1{z_{t-1} < q_{0.2}(z)} + eps_t with
/// AR(1) z. Causality lives only in the lower tail of z.
inline std::pair<Series, Series> lower_tail_causal_pair(int t_len, std::uint64_t seed) {
  Series z = ar1(0.3, t_len + 1, Rng::derive(seed, 1), 1.0, "z");
  std::vector<double> sorted = z.values;
  std::sort(sorted.begin(), sorted.end());
  double q20 = sorted[static_cast<std::size_t>(0.2 * static_cast<double>(sorted.size()))];
  Rng rng(Rng::derive(seed, 2));
  std::vector<double> y(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    double zlag = z.values[static_cast<std::size_t>(t)];
    y[static_cast<std::size_t>(t)] =
        0.8 * zlag * (zlag < q20 ? 1.0 : 0.0) + rng.normal();
  }
  Series ys = Series::from_values("y", std::move(y));
  Series zs = Series::from_values("z", std::vector<double>(z.values.begin() + 1,
                                                           z.values.end()));
  return {std::move(ys), std::move(zs)};
}

}  // namespace qcv::test
