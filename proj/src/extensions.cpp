#include "abco/extensions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace abco {

SymBanded regression_precision(const Matrix& x, std::span<const double> sigma2,
                               const std::vector<std::vector<double>>& weights, int d) {
  const std::size_t t_len = x.rows;
  const std::size_t p = x.cols;
  if (sigma2.size() != t_len || weights.size() != p)
    throw Error(ErrorCode::DimensionMismatch, "regression precision inputs disagree in size");
  const auto ud = static_cast<std::size_t>(d);
  SymBanded q(t_len * p, std::max<std::size_t>(p * ud, p - 1));
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b <= a; ++b) q.add(t * p + a, t * p + b, x(t, a) * x(t, b) / sigma2[t]);
  const auto coef = difference_coefficients(d);
  for (std::size_t j = 0; j < p; ++j) {
    if (weights[j].size() != t_len - ud) throw Error(ErrorCode::DimensionMismatch, "weights must have length T - d");
    for (std::size_t k = 0; k + ud < t_len; ++k) {
      const double w = weights[j][k];
      for (std::size_t a = 0; a <= ud; ++a)
        for (std::size_t b = 0; b <= a; ++b) q.add((k + a) * p + j, (k + b) * p + j, w * coef[a] * coef[b]);
    }
  }
  return q;
}

namespace {

class RegressionChain {
 public:
  RegressionChain(const TimeSeries& series, const ModelConfig& config)
      : y_(series.values), x_(*series.design), config_(config), rng_(config.seed) {
    const std::size_t t_len = y_.size();
    const std::size_t p = x_.cols;

    // constant-coefficient least squares start
    Eigen::MatrixXd xm(t_len, p);
    Eigen::VectorXd yv(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
      yv(static_cast<Eigen::Index>(t)) = y_[t];
      for (std::size_t j = 0; j < p; ++j) xm(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = x_(t, j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xm);
    rank_warning_ = qr.rank() < static_cast<Eigen::Index>(p);
    Eigen::VectorXd b0 = qr.solve(yv);
    beta_.resize(t_len * p);
    for (std::size_t t = 0; t < t_len; ++t)
      for (std::size_t j = 0; j < p; ++j) beta_[t * p + j] = b0(static_cast<Eigen::Index>(j));

    const auto inc = diff(y_, config.d);
    double ms = 0.0;
    for (double w : inc) ms += w * w;
    const double h0 = std::log(ms / static_cast<double>(inc.size()) + kLogOffset);
    const double scale = config.priors.tau_scale_factor;
    anchor0_ = std::log(std::max(variance(y_), 1e-12) * scale * scale / static_cast<double>(t_len));
    init_prec_ = 1.0 / (1e6 * std::max(variance(y_), 1e-12));
    m0_ = h0;
    const auto bracket = gamma_bounds(y_, config.d);
    for (std::size_t j = 0; j < p; ++j)
      blocks_.push_back(make_evolution(diff(path(j), config.d), h0, m0_, bracket, config.horseshoe));

    std::vector<double> resid(t_len);
    fitted(resid);
    for (std::size_t t = 0; t < t_len; ++t) resid[t] = y_[t] - resid[t];
    const auto dr = diff(resid, 1);
    noise_ = make_noise(t_len, std::max(variance(dr) / 2.0, 1e-8), config.use_sv_noise);
    outliers_ = make_outliers(t_len, robust_noise_scale(resid), config.priors);
  }

  RegressionDraws run(const ProgressFn& progress) {
    RegressionDraws out;
    const std::size_t t_len = y_.size();
    const std::size_t p = x_.cols;
    out.t_len = t_len;
    out.predictors = p;
    out.d = config_.d;
    out.rank_warning = rank_warning_;
    out.coef.resize(p);
    for (auto& c : out.coef) {
      c.t_len = t_len;
      c.d = config_.d;
      c.method = config_.horseshoe ? "horseshoe" : "abco";
      c.outliers_enabled = config_.use_outliers;
      c.sv_noise = config_.use_sv_noise;
    }
    for (int it = 0; it < config_.iters; ++it) {
      try {
        sweep();
      } catch (const Error& e) {
        throw Error(ErrorCode::SamplerFailure, "iteration " + std::to_string(it) + ": " + e.what());
      }
      if (it >= config_.burn && (it - config_.burn + 1) % config_.thin == 0) record(out);
      if (progress) progress(it + 1, config_.iters);
    }

    std::vector<double> fit_bar(t_len, 0.0), var_bar(t_len, 0.0);
    for (std::size_t i = 0; i < out.count; ++i) {
      for (std::size_t t = 0; t < t_len; ++t) {
        double f = out.coef[0].zeta[i * t_len + t];
        for (std::size_t j = 0; j < p; ++j) f += x_(t, j) * out.coef[j].beta[i * t_len + t];
        fit_bar[t] += f;
        var_bar[t] += out.coef[0].sigma_eps2[i * t_len + t];
      }
    }
    if (out.count > 0) {
      for (std::size_t t = 0; t < t_len; ++t) {
        fit_bar[t] /= static_cast<double>(out.count);
        var_bar[t] /= static_cast<double>(out.count);
      }
      out.deviance_at_mean = gaussian_deviance(y_, fit_bar, var_bar);
      for (auto& c : out.coef) c.deviance_at_mean = out.deviance_at_mean;
    }
    return out;
  }

 private:
  std::vector<double> path(std::size_t j) const {
    const std::size_t p = x_.cols;
    std::vector<double> out(y_.size());
    for (std::size_t t = 0; t < y_.size(); ++t) out[t] = beta_[t * p + j];
    return out;
  }

  void fitted(std::vector<double>& out) const {
    const std::size_t p = x_.cols;
    for (std::size_t t = 0; t < y_.size(); ++t) {
      double f = 0.0;
      for (std::size_t j = 0; j < p; ++j) f += x_(t, j) * beta_[t * p + j];
      out[t] = f;
    }
  }

  void sweep() {
    const std::size_t t_len = y_.size();
    const std::size_t p = x_.cols;
    const auto& pr = config_.priors;

    for (auto& blk : blocks_) {
      blk.anchor = m0_;
      sample_indicators(rng_, blk);
      sample_h(rng_, blk);
      sample_mu(rng_, blk);
    }
    // pooled level: Z prior around the data anchor, each mu_j a Z draw around it
    {
      double q = xi_global_, l = xi_global_ * anchor0_;
      for (const auto& blk : blocks_) {
        q += blk.xi_mu;
        l += blk.xi_mu * blk.mu;
      }
      m0_ = l / q + rng_.normal() / std::sqrt(q);
      xi_global_ = sample_polya_gamma(rng_, m0_ - anchor0_);
    }
    for (auto& blk : blocks_) {
      sample_phi1(rng_, blk, pr);
      sample_phi2(rng_, blk, pr);
    }
    for (auto& blk : blocks_) sample_gamma(rng_, blk, config_.grid_size);
    for (auto& blk : blocks_) sample_xi(rng_, blk);

    std::vector<double> fit(t_len), resid(t_len);
    fitted(fit);
    if (config_.use_outliers) {
      for (std::size_t t = 0; t < t_len; ++t) resid[t] = y_[t] - fit[t];
      sample_outliers(rng_, outliers_, resid, noise_.sigma2);
    }
    for (std::size_t t = 0; t < t_len; ++t) resid[t] = y_[t] - fit[t] - outliers_.zeta[t];
    sample_noise(rng_, noise_, resid, pr);

    // joint coefficient draw
    std::vector<std::vector<double>> weights(p);
    std::vector<double> l(t_len * p);
    for (std::size_t t = 0; t < t_len; ++t)
      for (std::size_t j = 0; j < p; ++j) l[t * p + j] = x_(t, j) * (y_[t] - outliers_.zeta[t]) / noise_.sigma2[t];
    // ridge > 0 adds a weak prior on every coefficient value, scaled to the largest increment precision,
    // so a path without data keeps a pivot well above rounding
    auto attempt = [&](double clip, double ridge) {
      for (std::size_t j = 0; j < p; ++j) {
        weights[j].resize(blocks_[j].size());
        for (std::size_t k = 0; k < blocks_[j].size(); ++k)
          weights[j][k] = std::exp(-std::clamp(blocks_[j].h[k], -clip, clip));
      }
      auto q = regression_precision(x_, noise_.sigma2, weights, config_.d);
      // diffuse prior on the initial values keeps an uninformative column proper
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(config_.d); ++k) q.add(k * p + j, k * p + j, init_prec_);
        if (ridge > 0.0) {
          const double r = ridge * *std::max_element(weights[j].begin(), weights[j].end());
          for (std::size_t t = 0; t < t_len; ++t) q.add(t * p + j, t * p + j, r);
        }
      }
      return BandedCholesky(q).sample(rng_, l);
    };
    const std::pair<double, double> tries[] = {{50.0, 0.0}, {30.0, 0.0}, {30.0, 1e-8}};
    for (std::size_t a = 0;; ++a) {
      try {
        beta_ = attempt(tries[a].first, tries[a].second);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotPositiveDefinite || a + 1 == std::size(tries)) throw;
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      blocks_[j].omega = diff(path(j), config_.d);
      blocks_[j].refresh_indicators();
    }
  }

  void record(RegressionDraws& out) {
    const std::size_t t_len = y_.size();
    const std::size_t p = x_.cols;
    std::vector<double> fit(t_len);
    fitted(fit);
    for (std::size_t t = 0; t < t_len; ++t) fit[t] += outliers_.zeta[t];
    const double dev = gaussian_deviance(y_, fit, noise_.sigma2);
    for (std::size_t j = 0; j < p; ++j) {
      auto& c = out.coef[j];
      const auto& blk = blocks_[j];
      const auto pj = path(j);
      c.beta.insert(c.beta.end(), pj.begin(), pj.end());
      c.zeta.insert(c.zeta.end(), outliers_.zeta.begin(), outliers_.zeta.end());
      if (config_.use_outliers)
        c.zeta_var.insert(c.zeta_var.end(), outliers_.lambda2.begin(), outliers_.lambda2.end());
      else
        c.zeta_var.insert(c.zeta_var.end(), t_len, 0.0);
      c.sigma_eps2.insert(c.sigma_eps2.end(), noise_.sigma2.begin(), noise_.sigma2.end());
      for (std::size_t k = 0; k < blk.size(); ++k) c.log_omega2.push_back(blk.log_omega2(k));
      c.h.insert(c.h.end(), blk.h.begin(), blk.h.end());
      c.gamma.push_back(blk.gamma);
      c.mu.push_back(blk.mu);
      c.phi1.push_back(blk.phi1);
      c.phi2.push_back(blk.phi2);
      c.tau2.push_back(std::exp(blk.mu));
      c.noise_mu.push_back(noise_.mu);
      c.noise_phi.push_back(noise_.phi);
      c.noise_sigma2.push_back(noise_.sigma_xi2);
      c.deviance.push_back(dev);
      ++c.count;
    }
    out.log_tau0_sq.push_back(m0_);
    out.deviance.push_back(dev);
    ++out.count;
  }

  std::vector<double> y_;
  Matrix x_;
  ModelConfig config_;
  Rng rng_;
  std::vector<double> beta_;
  std::vector<EvolutionBlock> blocks_;
  NoiseState noise_;
  OutlierState outliers_;
  double anchor0_ = 0.0;
  double m0_ = 0.0;
  double xi_global_ = 1.0;
  double init_prec_ = 0.0;
  bool rank_warning_ = false;
};

}  // namespace

RegressionDraws fit_regression(const TimeSeries& series, const ModelConfig& config, const ProgressFn& progress) {
  validate_config(config, series).throw_if_failed();
  if (!series.design) throw Error(ErrorCode::DimensionMismatch, "regression needs a design matrix");
  return RegressionChain(series, config).run(progress);
}

RegressionReport make_regression_report(const RegressionDraws& draws, const ModelConfig& config,
                                        const std::vector<std::string>& labels) {
  RegressionReport rep;
  for (const auto& c : draws.coef) rep.predictors.push_back(make_report(c, config, labels));
  rep.dic = dic(draws.deviance, draws.deviance_at_mean);
  rep.rank_warning = draws.rank_warning;
  return rep;
}

// ---------------------------------------------------------------------------

SampleSummary summarize_samples(std::span<const double> values, int bins) {
  SampleSummary s;
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  s.mean = mean(v);
  s.sd = std::sqrt(variance(v));
  s.lo95 = quantile(v, 0.025);
  s.median = quantile(v, 0.5);
  s.hi95 = quantile(v, 0.975);
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = *mn;
  const double hi = *mx > *mn ? *mx : *mn + 1.0;
  const int nb = std::max(bins, 1);
  s.bin_edges.resize(static_cast<std::size_t>(nb) + 1);
  for (int b = 0; b <= nb; ++b) s.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / nb;
  s.bin_counts.assign(static_cast<std::size_t>(nb), 0);
  for (double x : v) {
    auto b = static_cast<int>((x - lo) / (hi - lo) * nb);
    ++s.bin_counts[static_cast<std::size_t>(std::clamp(b, 0, nb - 1))];
  }
  return s;
}

double default_upsilon_var(std::span<const double> y) {
  const auto d2 = diff(y, 2);
  return 100.0 * std::max(variance(d2), 1e-12);
}

ItsFit fit_interrupted(const TimeSeries& series, const ModelConfig& config, const ItsConfig& its,
                       const ProgressFn& progress) {
  if (config.d != 2) throw Error(ErrorCode::BadParam, "interrupted time series requires d = 2");
  validate_config(config, series).throw_if_failed();
  const std::size_t t_len = series.size();
  if (its.pi < 3 || its.pi + 2 > t_len) throw Error(ErrorCode::BadPi, "intervention index must lie in [3, T - 2]");
  ItsFit fit;
  fit.pi = its.pi;
  fit.upsilon_var = its.upsilon_var.value_or(default_upsilon_var(series.values));
  GibbsChain chain(series, config, InterventionSpec{its.pi, fit.upsilon_var});
  fit.draws = chain.run(progress);
  fit.level_shift = chain.level_shift_draws();
  fit.slope_change = chain.slope_change_draws();
  fit.level_summary = summarize_samples(fit.level_shift);
  fit.slope_summary = summarize_samples(fit.slope_change);
  return fit;
}

}  // namespace abco
