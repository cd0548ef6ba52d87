#include "abco/random.hpp"

#include <algorithm>
#include <numbers>
#include <random>

namespace abco {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

constexpr double kPi = std::numbers::pi;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  for (auto& word : state_) word = splitmix64(sm);
}

Rng::result_type Rng::operator()() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_normal_ = true;
  return u * factor;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw Error(ErrorCode::BadParam, "gamma shape must be positive");
  return std::gamma_distribution<double>(shape, 1.0)(*this);
}

// ---------------------------------------------------------------------------
// Polya-Gamma PG(1, z), following Devroye's J* sampler as laid out by Windle.

namespace {

constexpr double kTrunc = 0.64;

double log_normal_cdf_impl(double x) noexcept {
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Asymptotic series for the lower tail.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

// n-th coefficient of the alternating series for the J*(1, 0) density.
double series_term(int n, double x) noexcept {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x <= 0.0) return 0.0;
  const double expnt = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
  return std::exp(expnt);
}

// Probability of proposing from the truncated exponential piece.
double exponential_mass(double z) noexcept {
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double root = std::sqrt(1.0 / kTrunc);
  const double b = root * (kTrunc * z - 1.0);
  const double a = -root * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_normal_cdf_impl(b);
  const double xa = x0 + z + log_normal_cdf_impl(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(Rng& rng, double z) {
  z = std::fabs(z);
  double x = kTrunc + 1.0;
  if (1.0 / kTrunc > z) {
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > kTrunc) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace

double log_normal_cdf(double x) noexcept { return log_normal_cdf_impl(x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_beta_pdf(double x, double a, double b) noexcept {
  if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + std::lgamma(a + b) - std::lgamma(a) -
         std::lgamma(b);
}

double log_normal_pdf(double x, double mean, double sd) noexcept {
  const double u = (x - mean) / sd;
  return -0.5 * u * u - std::log(sd) - 0.5 * std::log(2.0 * kPi);
}

double sample_polya_gamma(Rng& rng, double z) {
  if (!std::isfinite(z)) throw Error(ErrorCode::SamplerFailure, "Polya-Gamma tilt is not finite");
  // PG(1, z) = J*(1, z / 2) / 4
  z = std::fabs(z) * 0.5;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_exp = exponential_mass(z);
  while (true) {
    double x;
    if (rng.uniform() < p_exp)
      x = kTrunc + rng.exponential() / fz;
    else
      x = truncated_inverse_gaussian(rng, z);

    double s = series_term(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_term(n, x);
        if (y > s) break;
      }
    }
  }
}

double sample_inverse_gamma(Rng& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
    throw Error(ErrorCode::BadParam, "inverse gamma needs positive finite shape and scale");
  const double g = rng.gamma(shape);
  return scale / std::max(g, std::numeric_limits<double>::min());
}

namespace {

// Standard normal restricted to (a, b) with a >= 0 (upper tail or interior to the right).
double standard_tail(Rng& rng, double a, double b) {
  const double width = b - a;
  // Narrow interval: uniform proposal against the normal kernel.
  if (width < 0.5 || (std::isfinite(b) && width < 2.0 / (a + std::sqrt(a * a + 4.0)))) {
    while (true) {
      const double x = a + width * rng.uniform();
      if (std::log(rng.uniform()) <= 0.5 * (a * a - x * x)) return x;
    }
  }
  if (a < 0.3) {
    while (true) {
      const double x = rng.normal();
      if (x > a && x < b) return x;
    }
  }
  // Exponential proposal (Robert 1995).
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  while (true) {
    const double x = a + rng.exponential() / alpha;
    if (x >= b) continue;
    const double d = x - alpha;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

}  // namespace

double sample_trunc_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0)) throw Error(ErrorCode::BadParam, "truncated normal needs sd > 0");
  if (!(lo < hi)) throw Error(ErrorCode::EmptyInterval, "truncation interval is empty");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double x;
  if (a >= 0.0) {
    x = standard_tail(rng, a, b);
  } else if (b <= 0.0) {
    x = -standard_tail(rng, -b, -a);
  } else if (b - a < 0.5) {
    while (true) {
      x = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform()) <= -0.5 * x * x) break;
    }
  } else {
    // Interval contains zero: plain rejection accepts with probability >= P(|Z| < 0.25).
    do {
      x = rng.normal();
    } while (!(x > a && x < b));
  }
  double out = mean + sd * x;
  if (out <= lo) out = std::nextafter(lo, hi);
  if (out >= hi) out = std::nextafter(hi, lo);
  return out;
}

GriddyDraw griddy_sample(Rng& rng, std::span<const double> log_values, double lo, double hi) {
  const std::size_t n = log_values.size();
  if (n < 2) throw Error(ErrorCode::BadParam, "griddy sampler needs at least 2 grid points");
  if (!(lo < hi)) throw Error(ErrorCode::BadParam, "griddy bracket must satisfy lo < hi");

  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_values)
    if (!std::isnan(v)) top = std::max(top, v);
  if (!std::isfinite(top)) {
    rng.uniform();  // keep stream consumption independent of the outcome
    return {0.5 * (lo + hi), true};
  }

  std::vector<double> cdf(n, 0.0);
  double prev = std::isnan(log_values[0]) ? 0.0 : std::exp(log_values[0] - top);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = std::isnan(log_values[i]) ? 0.0 : std::exp(log_values[i] - top);
    cdf[i] = cdf[i - 1] + 0.5 * (prev + cur);
    prev = cur;
  }
  const double total = cdf.back();
  const double step = (hi - lo) / static_cast<double>(n - 1);
  if (!(total > 0.0)) {
    // Mass sits on an isolated grid point with zero-weight neighbours.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (log_values[i] > log_values[arg]) arg = i;
    rng.uniform();
    return {lo + step * static_cast<double>(arg), false};
  }
  const double u = rng.uniform() * total;
  const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
  const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
  const double width = cdf[cell] - cdf[cell - 1];
  const double frac = width > 0.0 ? (u - cdf[cell - 1]) / width : 0.5;
  return {lo + step * (static_cast<double>(cell - 1) + frac), false};
}

double LogChiSqMixture::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * means[i];
  return m;
}

double LogChiSqMixture::variance() const noexcept {
  const double m = mean();
  double second = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) second += weights[i] * (variances[i] + means[i] * means[i]);
  return second - m * m;
}

const LogChiSqMixture& mixture_table() noexcept {
  static const LogChiSqMixture table{
      {0.00609, 0.04775, 0.13057, 0.20674, 0.22715, 0.18842, 0.12047, 0.05591, 0.01575, 0.00115},
      {1.92677, 1.34744, 0.73504, 0.02266, -0.85173, -1.97278, -3.46788, -5.55246, -8.68384, -14.65000},
      {0.11265, 0.17788, 0.26768, 0.40611, 0.62699, 0.98583, 1.57469, 2.54498, 4.16591, 7.33342},
  };
  return table;
}

int sample_mixture_indicator(Rng& rng, double z, double h, const LogChiSqMixture& table) {
  constexpr std::size_t k = 10;
  std::array<double, k> logp{};
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const double r = z - h - table.means[i];
    logp[i] = std::log(table.weights[i]) - 0.5 * std::log(table.variances[i]) - 0.5 * r * r / table.variances[i];
    top = std::max(top, logp[i]);
  }
  double total = 0.0;
  for (auto& v : logp) {
    v = std::exp(v - top);
    total += v;
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < k; ++i) {
    u -= logp[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(k - 1);
}

}  // namespace abco
