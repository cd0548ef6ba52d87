#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abco/core.hpp"
#include "abco/random.hpp"

namespace abco {

/// Symmetric banded matrix storing the main diagonal and `bandwidth` sub-diagonals.
class SymBanded {
 public:
  SymBanded() = default;
  SymBanded(std::size_t dim, std::size_t bandwidth);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  /// Entry (i, j) with |i - j| <= bandwidth; reads outside the band return 0.
  double get(std::size_t i, std::size_t j) const noexcept;
  /// Reference to entry (i, j); requires |i - j| <= bandwidth.
  double& at(std::size_t i, std::size_t j) noexcept;
  void add(std::size_t i, std::size_t j, double v) noexcept { at(i, j) += v; }

  /// k-th diagonal (k = 0 main, k = 1 first sub-diagonal, ...), length dim - k.
  std::vector<double> diagonal(std::size_t k) const;

  SymBanded& operator+=(const SymBanded& other);

 private:
  friend class BandedCholesky;
  std::size_t dim_ = 0;
  std::size_t bw_ = 0;
  // row-major: data_[i * (bw + 1) + k] = Q(i, i - k)
  std::vector<double> data_;
};

/// Lower banded factor L with L L^T = Q.
class BandedCholesky {
 public:
  /// Throws NotPositiveDefinite (message carries the pivot index) on a pivot <= 1e-300.
  explicit BandedCholesky(const SymBanded& q);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t bandwidth() const noexcept { return bw_; }
  double factor(std::size_t i, std::size_t j) const noexcept;

  /// Solves L v = rhs in place.
  void forward(std::span<double> v) const;
  /// Solves L^T v = rhs in place.
  void backward(std::span<double> v) const;

  std::vector<double> solve(std::span<const double> rhs) const;
  /// Draw from N(Q^{-1} l, Q^{-1}).
  std::vector<double> sample(Rng& rng, std::span<const double> l) const;

 private:
  std::size_t dim_;
  std::size_t bw_;
  std::vector<double> data_;
};

inline BandedCholesky cholesky(const SymBanded& q) { return BandedCholesky(q); }
std::vector<double> solve(const BandedCholesky& l, std::span<const double> rhs);
std::vector<double> sample_gaussian(Rng& rng, const BandedCholesky& l, std::span<const double> lin);

/// D^T diag(weights) D for the d-th difference matrix D of shape (T - d) x T.
SymBanded build_difference_precision(std::size_t t_len, int d, std::span<const double> weights);

}  // namespace abco
