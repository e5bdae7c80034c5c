#include "qcv/math/banded.hpp"

#include <cmath>
#include <cstdlib>

namespace qcv {

BandedSpd::BandedSpd(std::size_t n, std::size_t bandwidth)
    : n_(n), w_(bandwidth), a_(n * (bandwidth + 1), 0.0) {}

void BandedSpd::add(std::size_t i, std::size_t j, double v) {
  if (j > i) std::swap(i, j);
  at(i, i - j) += v;
}

std::vector<double> BandedSpd::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    y[i] += at(i, 0) * x[i];
    for (std::size_t off = 1; off <= w_ && off <= i; ++off) {
      y[i] += at(i, off) * x[i - off];
      y[i - off] += at(i, off) * x[i];
    }
  }
  return y;
}

bool BandedSpd::factor() {
  l_.assign(n_ * (w_ + 1), 0.0);
  auto L = [&](std::size_t i, std::size_t off) -> double& { return l_[i * (w_ + 1) + off]; };
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i >= w_ ? i - w_ : 0;
    for (std::size_t j = jlo; j <= i; ++j) {
      double sum = at(i, i - j);
      for (std::size_t k = jlo; k < j; ++k) sum -= L(i, i - k) * L(j, j - k);
      if (j < i) {
        L(i, i - j) = sum / L(j, 0);
      } else {
        if (sum <= 0.0 || !std::isfinite(sum)) return false;
        L(i, 0) = std::sqrt(sum);
      }
    }
  }
  factored_ = true;
  return true;
}

std::vector<double> BandedSpd::solve(const std::vector<double>& b) const {
  auto L = [&](std::size_t i, std::size_t off) { return l_[i * (w_ + 1) + off]; };
  std::vector<double> y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i];
    for (std::size_t off = 1; off <= w_ && off <= i; ++off) s -= L(i, off) * y[i - off];
    y[i] = s / L(i, 0);
  }
  std::vector<double> x(n_);
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t off = 1; off <= w_ && ii + off < n_; ++off) s -= L(ii + off, off) * x[ii + off];
    x[ii] = s / L(ii, 0);
  }
  return x;
}

std::vector<double> BandedSpd::solve_lt(const std::vector<double>& z) const {
  auto L = [&](std::size_t i, std::size_t off) { return l_[i * (w_ + 1) + off]; };
  std::vector<double> x(n_);
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t off = 1; off <= w_ && ii + off < n_; ++off) s -= L(ii + off, off) * x[ii + off];
    x[ii] = s / L(ii, 0);
  }
  return x;
}

double BandedSpd::logdet() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += std::log(l_[i * (w_ + 1)]);
  return 2.0 * s;
}

}  // namespace qcv
