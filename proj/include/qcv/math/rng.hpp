#pragma once

#include <cstdint>
#include <random>

namespace qcv {

/// Deterministic random stream. All samplers are built on mt19937_64 with
/// inverse-CDF transforms so a seed fully pins the output sequence; nothing
/// here depends on libstdc++ distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform on (0, 1), 53-bit resolution, endpoints excluded.
  double uniform() {
    const std::uint64_t u = gen_() >> 11;
    return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via inverse CDF.
  double normal();

  double normal(double mu, double sd) { return mu + sd * normal(); }

  /// Gamma(shape, scale), Marsaglia-Tsang.
  double gamma(double shape, double scale);

  /// Inverse-gamma(shape, scale): 1/X with X ~ Gamma(shape, 1/scale).
  double inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, 1.0 / scale); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

  /// Stream derivation: mixes a seed with a stream label (splitmix64 steps)
  /// so per-stage / per-block / per-chain streams are independent and
  /// reproducible from one master seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  /// Hash of a string label into a stream id (FNV-1a), for named stages.
  static std::uint64_t stream_of(const char* label);

 private:
  std::mt19937_64 gen_;
};

}  // namespace qcv
