#include "abco/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abco {

SymBanded::SymBanded(std::size_t dim, std::size_t bandwidth)
    : dim_(dim), bw_(bandwidth), data_(dim * (bandwidth + 1), 0.0) {}

double SymBanded::get(std::size_t i, std::size_t j) const noexcept {
  if (i < j) std::swap(i, j);
  if (i - j > bw_ || i >= dim_) return 0.0;
  return data_[i * (bw_ + 1) + (i - j)];
}

double& SymBanded::at(std::size_t i, std::size_t j) noexcept {
  if (i < j) std::swap(i, j);
  return data_[i * (bw_ + 1) + (i - j)];
}

std::vector<double> SymBanded::diagonal(std::size_t k) const {
  if (k > bw_ || k >= dim_) return {};
  std::vector<double> out(dim_ - k);
  for (std::size_t i = k; i < dim_; ++i) out[i - k] = data_[i * (bw_ + 1) + k];
  return out;
}

SymBanded& SymBanded::operator+=(const SymBanded& other) {
  if (other.dim_ != dim_) throw Error(ErrorCode::DimensionMismatch, "banded matrices differ in dimension");
  if (other.bw_ > bw_) {
    SymBanded wider(dim_, other.bw_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t k = 0; k <= std::min(bw_, i); ++k) wider.at(i, i - k) = get(i, i - k);
    *this = std::move(wider);
  }
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t k = 0; k <= std::min(other.bw_, i); ++k) at(i, i - k) += other.get(i, i - k);
  return *this;
}

BandedCholesky::BandedCholesky(const SymBanded& q) : dim_(q.dim_), bw_(q.bw_), data_(q.data_) {
  const std::size_t w = bw_ + 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = j0; j <= i; ++j) {
      double s = data_[i * w + (i - j)];
      const std::size_t k0 = std::max(j0, j > bw_ ? j - bw_ : std::size_t{0});
      for (std::size_t k = k0; k < j; ++k) s -= data_[i * w + (i - k)] * data_[j * w + (j - k)];
      if (j == i) {
        if (!(s > 1e-300)) {
          throw Error(ErrorCode::NotPositiveDefinite, "non-positive pivot at index " + std::to_string(i));
        }
        data_[i * w] = std::sqrt(s);
      } else {
        data_[i * w + (i - j)] = s / data_[j * w];
      }
    }
  }
}

double BandedCholesky::factor(std::size_t i, std::size_t j) const noexcept {
  if (j > i || i - j > bw_) return 0.0;
  return data_[i * (bw_ + 1) + (i - j)];
}

void BandedCholesky::forward(std::span<double> v) const {
  const std::size_t w = bw_ + 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = v[i];
    const std::size_t j0 = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = j0; j < i; ++j) s -= data_[i * w + (i - j)] * v[j];
    v[i] = s / data_[i * w];
  }
}

void BandedCholesky::backward(std::span<double> v) const {
  const std::size_t w = bw_ + 1;
  for (std::size_t ii = dim_; ii-- > 0;) {
    double s = v[ii];
    const std::size_t j1 = std::min(dim_ - 1, ii + bw_);
    for (std::size_t j = ii + 1; j <= j1; ++j) s -= data_[j * w + (j - ii)] * v[j];
    v[ii] = s / data_[ii * w];
  }
}

std::vector<double> BandedCholesky::solve(std::span<const double> rhs) const {
  if (rhs.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "right-hand side has the wrong length");
  std::vector<double> x(rhs.begin(), rhs.end());
  forward(x);
  backward(x);
  return x;
}

std::vector<double> BandedCholesky::sample(Rng& rng, std::span<const double> l) const {
  auto mean = solve(l);
  std::vector<double> z(dim_);
  for (auto& v : z) v = rng.normal();
  backward(z);
  for (std::size_t i = 0; i < dim_; ++i) mean[i] += z[i];
  return mean;
}

std::vector<double> solve(const BandedCholesky& l, std::span<const double> rhs) { return l.solve(rhs); }

std::vector<double> sample_gaussian(Rng& rng, const BandedCholesky& l, std::span<const double> lin) {
  return l.sample(rng, lin);
}

SymBanded build_difference_precision(std::size_t t_len, int d, std::span<const double> weights) {
  if (d < 0 || static_cast<std::size_t>(d) >= t_len) throw Error(ErrorCode::BadParam, "need 0 <= d < T");
  if (weights.size() != t_len - static_cast<std::size_t>(d))
    throw Error(ErrorCode::DimensionMismatch, "weights must have length T - d");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::BadWeights, "difference weights must be positive");
  const auto coef = difference_coefficients(d);
  const auto ud = static_cast<std::size_t>(d);
  SymBanded q(t_len, ud);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    // row k of D touches columns k .. k + d
    for (std::size_t a = 0; a <= ud; ++a)
      for (std::size_t b = 0; b <= a; ++b) q.add(k + a, k + b, weights[k] * coef[a] * coef[b]);
  }
  return q;
}

}  // namespace abco
