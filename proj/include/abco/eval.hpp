#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abco/core.hpp"
#include "abco/simgen.hpp"

namespace abco {

/// Pair-counting Rand index between the segmentations induced by two changepoint lists.
double rand_index(std::span<const std::size_t> pred_cps, std::span<const std::size_t> true_cps, std::size_t t_len);
/// Hubert-Arabie adjusted Rand index; 1.0 when the chance-corrected denominator vanishes.
double adjusted_rand(std::span<const std::size_t> pred_cps, std::span<const std::size_t> true_cps, std::size_t t_len);

/// Same indices on arbitrary integer labelings.
double rand_index_labels(std::span<const int> a, std::span<const int> b);
double adjusted_rand_labels(std::span<const int> a, std::span<const int> b);

struct CpMetrics {
  std::optional<double> avg_dist_to_true;
  std::size_t diff_cp_count = 0;
  std::size_t n_pred = 0;
};

CpMetrics cp_metrics(std::span<const std::size_t> pred_cps, std::span<const std::size_t> true_cps);

struct OutlierMetrics {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// A flag within one step of a true outlier is a hit; exact matches are paired first.
OutlierMetrics outlier_metrics(std::span<const std::size_t> flagged, std::span<const std::size_t> true_outliers,
                               std::size_t t_len);

/// 2 * sigma^2 * log T with a MAD-based sigma.
double default_pelt_penalty(std::span<const double> values);
/// Penalised optimal partitioning with pruning under the Gaussian mean-change cost.
/// Returns the first index of every new segment. Throws TooShort if T < 2 * min_seg.
std::vector<std::size_t> pelt_baseline(std::span<const double> values, std::optional<double> penalty = std::nullopt,
                                       std::size_t min_seg = 2);

struct MethodResult {
  std::vector<std::size_t> changepoints;
  std::optional<std::vector<std::size_t>> flagged_outliers;
  /// Changepoint counts for every coefficient path (regression only).
  std::vector<std::size_t> per_predictor_cps;
};

struct Method {
  std::string name;
  std::function<MethodResult(const Simulation&, const ModelConfig&)> fit;
};

/// "abco", "horseshoe" (phi frozen at 0) or "pelt" (on diff(y, 1) when d >= 2).
Method builtin_method(const std::string& name);

struct BenchmarkRow {
  std::string method;
  double rand_avg = 0.0;
  double adj_rand_avg = 0.0;
  double avg_no_cp = 0.0;
  std::size_t n_zero_cp = 0;
  /// Mean over replicates with at least one predicted changepoint.
  std::optional<double> avg_dist;
  double avg_diff_cp = 0.0;
  /// Standard error of the adjusted Rand average.
  double se = 0.0;
  std::optional<double> tpr;
  std::optional<double> fpr;
  /// Mean changepoint count per coefficient path (regression scenarios).
  std::vector<double> avg_cp_per_predictor;
  std::size_t n_reps = 0;
  std::size_t failures = 0;
  std::vector<double> adj_rand;
};

/// Fits every method on n_reps replicates (scenario.seed + i, config.seed + i) using up to
/// `jobs` threads; a failed fit counts as a failure and is left out of the averages.
std::vector<BenchmarkRow> run_benchmark(const Scenario& scenario, int n_reps, const std::vector<Method>& methods,
                                        const ModelConfig& config, int jobs = 1);

}  // namespace abco
