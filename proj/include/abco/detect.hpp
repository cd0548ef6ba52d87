#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abco/core.hpp"
#include "abco/gibbs.hpp"

namespace abco {

/// p_k = fraction of draws with log_omega2[k] > gamma of the same draw.
std::vector<double> cp_probability(const PosteriorDraws& draws);
std::vector<double> cp_probability(std::span<const double> log_omega2, std::span<const double> gamma);

/// Indices with probs > cutoff, thinned greedily by descending probability (ties: earlier
/// index) so that kept indices are at least min_sep apart. Sorted ascending.
std::vector<std::size_t> declare_changepoints(std::span<const double> probs, double cutoff, int min_sep);

struct OutlierScores {
  std::vector<double> scores;
  std::vector<std::size_t> flagged;
};

/// o_t = mean of lambda2 / (lambda2 + sigma2); throws ComponentDisabled without outliers.
OutlierScores outlier_scores(const PosteriorDraws& draws, double cutoff);

struct TrendSummary {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> obs_lo;
  std::vector<double> obs_hi;
};

/// Pointwise mean and central `level` bands of beta, and of beta + sigma * z (z ~ N(0, 1)).
TrendSummary summarize_trend(const PosteriorDraws& draws, double level = 0.95, std::uint64_t seed = 1);

/// Linear-interpolated empirical quantile of unsorted values.
double quantile(std::vector<double> values, double prob);

/// mean deviance + (mean deviance - deviance at posterior means).
double dic(std::span<const double> deviance, double deviance_at_mean);
double dic(const PosteriorDraws& draws);

struct ShrinkageDiagnostics {
  /// Posterior mean of 1 / (1 + exp(h_k)).
  std::vector<double> kappa;
  /// Posterior mean of exp((1 - phi_k) mu + phi_k h_k), phi_k = phi1 + phi2 s_k.
  std::vector<double> psi;
};

ShrinkageDiagnostics shrinkage_diagnostics(const PosteriorDraws& draws);

/// psi for a given global scale, AR coefficient phi1 + phi2 s and current shrinkage kappa.
double shrinkage_psi(double tau, double phi, double kappa);
/// Unnormalised one-step posterior kernel of the next shrinkage proportion.
double shrinkage_kernel(double kappa_next, double y_next, double psi);

struct ChangepointReport {
  std::string method = "abco";
  int d = 2;
  std::size_t t_len = 0;
  std::size_t draws = 0;
  /// Aligned with the increments: entry k refers to observation k + d.
  std::vector<double> cp_prob;
  /// Observation indices (first index of the new regime).
  std::vector<std::size_t> changepoints;
  std::vector<double> outlier_scores;
  std::vector<std::size_t> flagged_outliers;
  std::vector<double> trend_mean;
  std::vector<double> trend_lo95;
  std::vector<double> trend_hi95;
  std::vector<double> obs_lo95;
  std::vector<double> obs_hi95;
  double dic = 0.0;
  double gamma_mean = 0.0;
  double phi1_mean = 0.0;
  double phi2_mean = 0.0;
  double tau2_mean = 0.0;
  std::vector<std::string> labels;

  friend bool operator==(const ChangepointReport&, const ChangepointReport&) = default;
};

ChangepointReport make_report(const PosteriorDraws& draws, const ModelConfig& config,
                              const std::vector<std::string>& labels = {});

/// Report from explicit probabilities: declared increment index k becomes observation k + d.
std::vector<std::size_t> changepoints_from_probs(std::span<const double> probs, int d, double cutoff, int min_sep);

}  // namespace abco
