#pragma once

#include <cstddef>
#include <vector>

namespace qcv {

/// Symmetric positive definite banded matrix with small bandwidth (the AR(1)
/// and AR(2) state precisions have bandwidth 1 and 2). Storage is diagonal
/// plus `bandwidth` subdiagonals; all solves are O(n * bandwidth^2).
class BandedSpd {
 public:
  BandedSpd(std::size_t n, std::size_t bandwidth);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return w_; }

  /// Element A(i, i-off), off in [0, bandwidth].
  double& at(std::size_t i, std::size_t off) { return a_[i * (w_ + 1) + off]; }
  double at(std::size_t i, std::size_t off) const { return a_[i * (w_ + 1) + off]; }

  void add(std::size_t i, std::size_t j, double v);

  std::vector<double> multiply(const std::vector<double>& x) const;

  /// Banded Cholesky A = L L'. Returns false if a pivot is not positive.
  bool factor();

  /// Solve A x = b using the factorization.
  std::vector<double> solve(const std::vector<double>& b) const;

  /// Solve L' x = z (used to draw N(0, A^{-1}) from iid z).
  std::vector<double> solve_lt(const std::vector<double>& z) const;

  /// log det A from the factorization.
  double logdet() const;

 private:
  std::size_t n_, w_;
  std::vector<double> a_;  // original matrix
  std::vector<double> l_;  // Cholesky factor
  bool factored_ = false;
};

}  // namespace qcv
