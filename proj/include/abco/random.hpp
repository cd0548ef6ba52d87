#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "abco/core.hpp"

namespace abco {

/// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 1, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  double exponential() noexcept { return -std::log(uniform()); }
  /// Gamma(shape, scale = 1).
  double gamma(double shape);

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Draw from PG(1, z) by Devroye-style alternating-series accept/reject.
double sample_polya_gamma(Rng& rng, double z);

/// Density proportional to x^(-shape-1) exp(-scale / x).
double sample_inverse_gamma(Rng& rng, double shape, double scale);

/// N(mean, sd^2) restricted to (lo, hi); lo / hi may be infinite.
double sample_trunc_normal(Rng& rng, double mean, double sd, double lo, double hi);

/// log of the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double x) noexcept;
double normal_cdf(double x) noexcept;
double log_beta_pdf(double x, double a, double b) noexcept;
double log_normal_pdf(double x, double mean, double sd) noexcept;

/// One slice-sampling transition on the fixed bracket [lo, hi] with shrinkage.
/// The returned point has log_density above the sampled slice level.
template <class LogDensity>
double slice_sample(Rng& rng, LogDensity&& log_density, double current, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::BadParam, "slice bracket must satisfy lo < hi");
  const double f0 = log_density(current);
  if (!std::isfinite(f0)) throw Error(ErrorCode::Degenerate, "log density is not finite at the current point");
  const double level = f0 - rng.exponential();
  double left = lo;
  double right = hi;
  for (int step = 0; step < 400; ++step) {
    const double proposal = left + (right - left) * rng.uniform();
    const double f = log_density(proposal);
    if (f > level) return proposal;
    if (proposal < current)
      left = proposal;
    else
      right = proposal;
    if (right - left <= 1e-300) break;
  }
  return current;
}

struct GriddyDraw {
  double value = 0.0;
  /// Every conditional value underflowed; value is the bracket midpoint.
  bool all_zero = false;
};

/// Inverse-CDF draw from log-conditional values given on an equally spaced grid over
/// [lo, hi]; the CDF is piecewise linear between grid points.
GriddyDraw griddy_sample(Rng& rng, std::span<const double> log_values, double lo, double hi);

template <class LogCond>
GriddyDraw griddy_sample(Rng& rng, LogCond&& log_cond, double lo, double hi, int n_grid) {
  if (n_grid < 2) throw Error(ErrorCode::BadParam, "griddy sampler needs at least 2 grid points");
  if (!(lo < hi)) throw Error(ErrorCode::BadParam, "griddy bracket must satisfy lo < hi");
  std::vector<double> values(static_cast<std::size_t>(n_grid));
  const double step = (hi - lo) / (n_grid - 1);
  for (int i = 0; i < n_grid; ++i) values[static_cast<std::size_t>(i)] = log_cond(lo + step * i);
  return griddy_sample(rng, values, lo, hi);
}

/// Ten-component Gaussian mixture approximating log(chi^2_1) (Omori, Chib, Shephard, Nakajima 2007).
struct LogChiSqMixture {
  std::array<double, 10> weights;
  std::array<double, 10> means;
  std::array<double, 10> variances;

  double mean() const noexcept;
  double variance() const noexcept;
};

const LogChiSqMixture& mixture_table() noexcept;

/// Draws r with probability proportional to q_r N(z; h + m_r, v_r).
int sample_mixture_indicator(Rng& rng, double z, double h, const LogChiSqMixture& table);

}  // namespace abco
