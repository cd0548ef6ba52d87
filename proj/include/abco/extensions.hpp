#pragma once

#include <optional>
#include <span>
#include <vector>

#include "abco/banded.hpp"
#include "abco/core.hpp"
#include "abco/detect.hpp"
#include "abco/gibbs.hpp"

namespace abco {

// ---- dynamic regression -----------------------------------------------------

struct RegressionDraws {
  std::size_t count = 0;
  std::size_t t_len = 0;
  std::size_t predictors = 0;
  int d = 0;
  /// One entry per predictor; `beta` holds that coefficient path, the observation-level
  /// fields (zeta, sigma_eps2, ...) are shared copies.
  std::vector<PosteriorDraws> coef;
  /// log of the pooled global scale tau0^2 per draw.
  std::vector<double> log_tau0_sq;
  std::vector<double> deviance;
  double deviance_at_mean = 0.0;
  /// X^T X was numerically singular at initialisation.
  bool rank_warning = false;
};

/// Observation precision sum_t x_t x_t^T / sigma2_t plus the difference prior of every
/// coefficient path, in time-major interleaved order (index t * p + j).
SymBanded regression_precision(const Matrix& x, std::span<const double> sigma2,
                               const std::vector<std::vector<double>>& weights, int d);

RegressionDraws fit_regression(const TimeSeries& series, const ModelConfig& config, const ProgressFn& progress = {});

struct RegressionReport {
  std::vector<ChangepointReport> predictors;
  double dic = 0.0;
  bool rank_warning = false;
};

RegressionReport make_regression_report(const RegressionDraws& draws, const ModelConfig& config,
                                        const std::vector<std::string>& labels = {});

// ---- interrupted time series ------------------------------------------------

struct ItsConfig {
  /// First post-intervention observation (0-based).
  std::size_t pi = 0;
  /// Defaults to 100 * var(diff(y, 2)).
  std::optional<double> upsilon_var;
};

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lo95 = 0.0;
  double median = 0.0;
  double hi95 = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::size_t> bin_counts;

  friend bool operator==(const SampleSummary&, const SampleSummary&) = default;
};

SampleSummary summarize_samples(std::span<const double> values, int bins = 20);

struct ItsFit {
  PosteriorDraws draws;
  std::size_t pi = 0;
  double upsilon_var = 0.0;
  std::vector<double> level_shift;
  std::vector<double> slope_change;
  SampleSummary level_summary;
  SampleSummary slope_summary;
};

double default_upsilon_var(std::span<const double> y);

/// Requires config.d == 2 and 3 <= pi <= T - 2; otherwise BadPi / BadParam.
ItsFit fit_interrupted(const TimeSeries& series, const ModelConfig& config, const ItsConfig& its,
                       const ProgressFn& progress = {});

}  // namespace abco
