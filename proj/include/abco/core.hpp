#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abco {

enum class ErrorCode {
  SeriesTooShort,
  NonFinite,
  BadBounds,
  TooShort,
  BadParam,
  EmptyInterval,
  Degenerate,
  AllZero,
  NotPositiveDefinite,
  DimensionMismatch,
  BadWeights,
  DegenerateBounds,
  ComponentDisabled,
  BadCps,
  BadPi,
  SamplerFailure,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Offset c in log(x^2 + c) used wherever a squared increment or residual is logged.
inline constexpr double kLogOffset = 1e-8;
inline constexpr int kMaxOrder = 3;

/// Dense row-major matrix; only used for regression designs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::vector<double> column(std::size_t c) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct TimeSeries {
  std::vector<double> values;
  std::optional<Matrix> design;
  /// Informational time axis (index or ISO timestamps); never used in the math.
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t predictors() const noexcept { return design ? design->cols : 0; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

struct PriorHyper {
  double z_alpha = 0.5;
  double z_beta = 0.5;
  double phi1_beta_a = 10.0;
  double phi1_beta_b = 2.0;
  double phi2_mean = -2.0;
  double phi2_sd = 0.5;
  /// tau ~ C+(0, tau_scale_factor * sd(y) / sqrt(T)).
  double tau_scale_factor = 1.0;
  /// Half-Cauchy scale of the global outlier variance, in units of the robust noise sd of y.
  double outlier_global_scale = 1.0;
  /// Half-Cauchy scale of the local outlier multipliers (dimensionless).
  double outlier_local_scale = 1.0;
  double sv_mu_prior_sd = 10.0;
  double sv_phi_beta_a = 20.0;
  double sv_phi_beta_b = 1.5;
  double sv_sigma_ig_shape = 2.5;
  double sv_sigma_ig_scale = 0.25;
  /// Inverse-gamma prior on the constant noise variance when SV noise is off.
  double noise_ig_shape = 0.01;
  double noise_ig_scale = 0.01;

  friend bool operator==(const PriorHyper&, const PriorHyper&) = default;
};

struct ModelConfig {
  int d = 2;
  int iters = 5000;
  int burn = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  bool use_sv_noise = true;
  bool use_outliers = true;
  /// Freeze phi1 = phi2 = 0: the static horseshoe special case.
  bool horseshoe = false;
  double cp_prob_cutoff = 0.5;
  double outlier_cutoff = 0.95;
  int min_cp_separation = 5;
  int grid_size = 150;
  PriorHyper priors;

  /// Number of retained draws, (iters - burn) / thin rounded down.
  int retained() const noexcept { return iters > burn && thin > 0 ? (iters - burn) / thin : 0; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationResult {
  std::vector<ValidationIssue> issues;
  bool ok() const noexcept { return issues.empty(); }
  bool has(ErrorCode code) const noexcept;
  /// Throws the first issue as an Error; no-op when ok().
  void throw_if_failed() const;
};

/// Checks every ModelConfig / TimeSeries invariant and lists all violations.
ValidationResult validate_config(const ModelConfig& config, const TimeSeries& series);

/// Iterated first differences; result has length values.size() - d.
std::vector<double> diff(std::span<const double> values, int d);

/// Binomial weights of the d-th difference: diff(v, d)[k] = sum_j coef[j] * v[k + j].
std::vector<double> difference_coefficients(int d);

/// Inverts diff(): rebuilds a length-(d + increments.size()) sequence from its first d
/// values and its d-th differences.
std::vector<double> integrate(std::span<const double> initial, std::span<const double> increments);

double mean(std::span<const double> v);
/// Sample variance with denominator n - 1.
double variance(std::span<const double> v);

}  // namespace abco
