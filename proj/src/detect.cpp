#include "abco/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace abco {

std::vector<double> cp_probability(std::span<const double> log_omega2, std::span<const double> gamma) {
  const std::size_t m = gamma.size();
  if (m == 0) throw Error(ErrorCode::BadParam, "no draws");
  if (log_omega2.size() % m != 0) throw Error(ErrorCode::DimensionMismatch, "draw matrix is ragged");
  const std::size_t n = log_omega2.size() / m;
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (log_omega2[i * n + k] > gamma[i]) p[k] += 1.0;
  for (auto& v : p) v /= static_cast<double>(m);
  return p;
}

std::vector<double> cp_probability(const PosteriorDraws& draws) { return cp_probability(draws.log_omega2, draws.gamma); }

std::vector<std::size_t> declare_changepoints(std::span<const double> probs, double cutoff, int min_sep) {
  std::vector<std::size_t> cand;
  for (std::size_t k = 0; k < probs.size(); ++k)
    if (probs[k] > cutoff) cand.push_back(k);
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<std::size_t> kept;
  const auto sep = static_cast<std::size_t>(std::max(min_sep, 1));
  for (std::size_t k : cand) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t j) {
      return (k > j ? k - j : j - k) >= sep;
    });
    if (clear) kept.push_back(k);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::size_t> changepoints_from_probs(std::span<const double> probs, int d, double cutoff, int min_sep) {
  auto cps = declare_changepoints(probs, cutoff, min_sep);
  for (auto& k : cps) k += static_cast<std::size_t>(d);
  return cps;
}

OutlierScores outlier_scores(const PosteriorDraws& draws, double cutoff) {
  if (!draws.outliers_enabled) throw Error(ErrorCode::ComponentDisabled, "outlier component was not fitted");
  const std::size_t m = draws.count;
  const std::size_t t_len = draws.t_len;
  if (m == 0) throw Error(ErrorCode::BadParam, "no draws");
  OutlierScores out;
  out.scores.assign(t_len, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      const double l2 = draws.zeta_var[i * t_len + t];
      const double s2 = draws.sigma_eps2[i * t_len + t];
      out.scores[t] += l2 / (l2 + s2);
    }
  }
  for (std::size_t t = 0; t < t_len; ++t) {
    out.scores[t] /= static_cast<double>(m);
    if (out.scores[t] > cutoff) out.flagged.push_back(t);
  }
  return out;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TrendSummary summarize_trend(const PosteriorDraws& draws, double level, std::uint64_t seed) {
  const std::size_t m = draws.count;
  const std::size_t t_len = draws.t_len;
  if (m < 1) throw Error(ErrorCode::BadParam, "no draws");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::BadParam, "level must lie in (0, 1)");
  const double a = 0.5 * (1.0 - level);
  TrendSummary out;
  out.mean.assign(t_len, 0.0);
  out.lo.resize(t_len);
  out.hi.resize(t_len);
  out.obs_lo.resize(t_len);
  out.obs_hi.resize(t_len);

  std::vector<double> obs(m * t_len);
  Rng rng(seed, 0xba4d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < t_len; ++t)
      obs[i * t_len + t] = draws.beta[i * t_len + t] + std::sqrt(draws.sigma_eps2[i * t_len + t]) * rng.normal();

  std::vector<double> col(m);
  for (std::size_t t = 0; t < t_len; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      col[i] = draws.beta[i * t_len + t];
      sum += col[i];
    }
    out.mean[t] = sum / static_cast<double>(m);
    out.lo[t] = std::min(quantile(col, a), out.mean[t]);
    out.hi[t] = std::max(quantile(col, 1.0 - a), out.mean[t]);
    for (std::size_t i = 0; i < m; ++i) col[i] = obs[i * t_len + t];
    out.obs_lo[t] = quantile(col, a);
    out.obs_hi[t] = quantile(col, 1.0 - a);
  }
  return out;
}

double dic(std::span<const double> deviance, double deviance_at_mean) {
  if (deviance.empty()) throw Error(ErrorCode::BadParam, "no deviance draws");
  const double mean = std::accumulate(deviance.begin(), deviance.end(), 0.0) / static_cast<double>(deviance.size());
  return mean + (mean - deviance_at_mean);
}

double dic(const PosteriorDraws& draws) { return dic(draws.deviance, draws.deviance_at_mean); }

ShrinkageDiagnostics shrinkage_diagnostics(const PosteriorDraws& draws) {
  const std::size_t m = draws.count;
  const std::size_t n = draws.increments();
  ShrinkageDiagnostics out;
  out.kappa.assign(n, 0.0);
  out.psi.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double h = draws.h[i * n + k];
      const double s = draws.log_omega2[i * n + k] > draws.gamma[i] ? 1.0 : 0.0;
      const double phi = draws.phi1[i] + draws.phi2[i] * s;
      out.kappa[k] += 1.0 / (1.0 + std::exp(std::clamp(h, -700.0, 700.0)));
      out.psi[k] += std::exp(std::clamp((1.0 - phi) * draws.mu[i] + phi * h, -700.0, 700.0));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    out.kappa[k] /= static_cast<double>(m);
    out.psi[k] /= static_cast<double>(m);
  }
  return out;
}

double shrinkage_psi(double tau, double phi, double kappa) {
  return std::pow(tau * tau, 1.0 - phi) * std::pow((1.0 - kappa) / kappa, phi);
}

double shrinkage_kernel(double kappa_next, double y_next, double psi) {
  return std::pow(1.0 - kappa_next, -0.5) / (1.0 + (psi - 1.0) * kappa_next) *
         std::exp(-0.5 * y_next * y_next * kappa_next);
}

ChangepointReport make_report(const PosteriorDraws& draws, const ModelConfig& config,
                              const std::vector<std::string>& labels) {
  ChangepointReport rep;
  rep.method = draws.method;
  rep.d = draws.d;
  rep.t_len = draws.t_len;
  rep.draws = draws.count;
  rep.cp_prob = cp_probability(draws);
  rep.changepoints =
      changepoints_from_probs(rep.cp_prob, draws.d, config.cp_prob_cutoff, config.min_cp_separation);
  if (draws.outliers_enabled) {
    auto scores = outlier_scores(draws, config.outlier_cutoff);
    rep.outlier_scores = std::move(scores.scores);
    rep.flagged_outliers = std::move(scores.flagged);
  }
  auto trend = summarize_trend(draws, 0.95, config.seed);
  rep.trend_mean = std::move(trend.mean);
  rep.trend_lo95 = std::move(trend.lo);
  rep.trend_hi95 = std::move(trend.hi);
  rep.obs_lo95 = std::move(trend.obs_lo);
  rep.obs_hi95 = std::move(trend.obs_hi);
  rep.dic = dic(draws);
  rep.gamma_mean = mean(draws.gamma);
  rep.phi1_mean = mean(draws.phi1);
  rep.phi2_mean = mean(draws.phi2);
  rep.tau2_mean = mean(draws.tau2);
  rep.labels = labels;
  return rep;
}

}  // namespace abco
