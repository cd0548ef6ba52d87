#include "abco/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace abco {

namespace {

constexpr double kClipH = 50.0;
constexpr double kClipRetry = 30.0;

double clamp_positive(double v) { return std::clamp(v, 1e-200, 1e200); }

// sum_k w_k (a_k - p * b_k)^2 = a - 2 b p + c p^2
struct Quadratic {
  double a = 0.0, b = 0.0, c = 0.0;
  double at(double p) const { return a - 2.0 * b * p + c * p * p; }
  void add(double w, double target, double reg) {
    a += w * target * target;
    b += w * target * reg;
    c += w * reg * reg;
  }
};

Quadratic phi1_quadratic(const EvolutionBlock& blk, const std::vector<double>& ht) {
  Quadratic q;
  for (std::size_t k = 0; k + 1 < blk.size(); ++k)
    q.add(blk.xi[k + 1], ht[k + 1] - blk.phi2 * blk.s[k] * ht[k], ht[k]);
  return q;
}

Quadratic phi2_quadratic(const EvolutionBlock& blk, const std::vector<double>& ht) {
  Quadratic q;
  for (std::size_t k = 0; k + 1 < blk.size(); ++k)
    if (blk.s[k]) q.add(blk.xi[k + 1], ht[k + 1] - blk.phi1 * ht[k], ht[k]);
  return q;
}

bool any_flagged(const EvolutionBlock& blk) {
  for (std::size_t k = 0; k + 1 < blk.size(); ++k)
    if (blk.s[k]) return true;
  return false;
}

}  // namespace

void EvolutionBlock::refresh_indicators() {
  s.resize(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) s[k] = log_omega2(k) > gamma ? 1 : 0;
}

std::vector<double> EvolutionBlock::centered() const {
  std::vector<double> out(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = h[k] - mu;
  return out;
}

EvolutionBlock make_evolution(std::span<const double> omega, double initial_log_var, double anchor,
                              std::pair<double, double> gamma_bracket, bool frozen_phi) {
  EvolutionBlock blk;
  const std::size_t n = omega.size();
  blk.omega.assign(omega.begin(), omega.end());
  blk.h.assign(n, initial_log_var);
  blk.r.assign(n, 4);
  blk.xi.assign(n, 1.0);
  blk.eta.assign(n, 0.0);
  blk.mu = initial_log_var;
  blk.anchor = anchor;
  blk.gamma_lo = gamma_bracket.first;
  blk.gamma_hi = gamma_bracket.second;
  blk.gamma = 0.5 * (blk.gamma_lo + blk.gamma_hi);
  blk.frozen_phi = frozen_phi;
  if (frozen_phi) blk.phi1 = blk.phi2 = 0.0;
  blk.refresh_indicators();
  return blk;
}

std::pair<double, double> gamma_bounds(std::span<const double> y, int d, bool& degenerate) {
  const auto inc = diff(y, d);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double w : inc) {
    const double z = std::log(w * w + kLogOffset);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  degenerate = !(hi > lo);
  if (degenerate) return {lo - 1.0, lo + 1.0};
  return {lo, hi};
}

std::pair<double, double> gamma_bounds(std::span<const double> y, int d) {
  bool degenerate = false;
  return gamma_bounds(y, d, degenerate);
}

GaussianTerms h_conditional(const EvolutionBlock& blk) {
  const auto& tab = mixture_table();
  const std::size_t n = blk.size();
  GaussianTerms out{SymBanded(n, 1), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double v = tab.variances[blk.r[k]];
    double main = 1.0 / v + blk.xi[k];
    if (k + 1 < n) {
      const double phi = blk.phi_at(k);
      main += phi * phi * blk.xi[k + 1];
      out.q.at(k + 1, k) = -phi * blk.xi[k + 1];
    }
    out.q.at(k, k) = main;
    out.l[k] = (blk.log_omega2(k) - tab.means[blk.r[k]] - blk.mu) / v;
  }
  return out;
}

std::pair<double, double> mu_conditional(const EvolutionBlock& blk) {
  double q = blk.xi_mu + blk.xi[0];
  double l = blk.xi_mu * blk.anchor + blk.xi[0] * blk.h[0];
  for (std::size_t k = 0; k + 1 < blk.size(); ++k) {
    const double phi = blk.phi_at(k);
    const double w = blk.xi[k + 1] * (1.0 - phi);
    q += w * (1.0 - phi);
    l += w * (blk.h[k + 1] - phi * blk.h[k]);
  }
  return {q, l};
}

double phi1_log_conditional(const EvolutionBlock& blk, double x, const PriorHyper& priors) {
  const auto quad = phi1_quadratic(blk, blk.centered());
  return -0.5 * quad.at(2.0 * x - 1.0) + log_beta_pdf(x, priors.phi1_beta_a, priors.phi1_beta_b);
}

double phi2_log_conditional(const EvolutionBlock& blk, double x, const PriorHyper& priors) {
  const auto quad = phi2_quadratic(blk, blk.centered());
  return -0.5 * quad.at(x) + log_normal_pdf(x, priors.phi2_mean, priors.phi2_sd);
}

std::vector<double> gamma_log_conditional(const EvolutionBlock& blk, std::span<const double> grid) {
  const auto ht = blk.centered();
  const std::size_t n = blk.size();
  double base = 0.0;
  std::vector<std::pair<double, double>> moves;  // (log omega^2, gain when flagged)
  moves.reserve(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double e0 = ht[k + 1] - blk.phi1 * ht[k];
    const double e1 = ht[k + 1] - (blk.phi1 + blk.phi2) * ht[k];
    const double a0 = -0.5 * blk.xi[k + 1] * e0 * e0;
    const double a1 = -0.5 * blk.xi[k + 1] * e1 * e1;
    base += a0;
    moves.emplace_back(blk.log_omega2(k), a1 - a0);
  }
  std::sort(moves.begin(), moves.end());
  // suffix[i] = total gain of moves[i..]
  std::vector<double> suffix(moves.size() + 1, 0.0);
  for (std::size_t i = moves.size(); i-- > 0;) suffix[i] = suffix[i + 1] + moves[i].second;

  std::vector<double> out(grid.size());
  std::size_t first_above = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (first_above < moves.size() && moves[first_above].first <= grid[g]) ++first_above;
    out[g] = base + suffix[first_above];
  }
  return out;
}

void sample_indicators(Rng& rng, EvolutionBlock& blk) {
  const auto& tab = mixture_table();
  for (std::size_t k = 0; k < blk.size(); ++k) blk.r[k] = sample_mixture_indicator(rng, blk.log_omega2(k), blk.h[k], tab);
}

void sample_h(Rng& rng, EvolutionBlock& blk) {
  const auto terms = h_conditional(blk);
  const auto draw = BandedCholesky(terms.q).sample(rng, terms.l);
  for (std::size_t k = 0; k < blk.size(); ++k) blk.h[k] = draw[k] + blk.mu;
}

void sample_mu(Rng& rng, EvolutionBlock& blk) {
  const auto [q, l] = mu_conditional(blk);
  blk.mu = l / q + rng.normal() / std::sqrt(q);
  blk.xi_mu = sample_polya_gamma(rng, blk.mu - blk.anchor);
  blk.xi[0] = sample_polya_gamma(rng, blk.h[0] - blk.mu);
}

void sample_phi1(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors) {
  if (blk.frozen_phi) return;
  const auto quad = phi1_quadratic(blk, blk.centered());
  auto logf = [&](double x) {
    return -0.5 * quad.at(2.0 * x - 1.0) + log_beta_pdf(x, priors.phi1_beta_a, priors.phi1_beta_b);
  };
  const double x = slice_sample(rng, logf, 0.5 * (blk.phi1 + 1.0), 0.0, 1.0);
  blk.phi1 = 2.0 * x - 1.0;
}

void sample_phi2(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors) {
  if (blk.frozen_phi) return;
  if (!any_flagged(blk)) {
    blk.phi2 = sample_trunc_normal(rng, priors.phi2_mean, priors.phi2_sd,
                                   -std::numeric_limits<double>::infinity(), 0.0);
    return;
  }
  const auto quad = phi2_quadratic(blk, blk.centered());
  auto logf = [&](double x) { return -0.5 * quad.at(x) + log_normal_pdf(x, priors.phi2_mean, priors.phi2_sd); };
  const double start = std::clamp(blk.phi2, -10.0 + 1e-12, -1e-12);
  blk.phi2 = slice_sample(rng, logf, start, -10.0, 0.0);
}

bool sample_gamma(Rng& rng, EvolutionBlock& blk, int grid_size) {
  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  const double step = (blk.gamma_hi - blk.gamma_lo) / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) grid[static_cast<std::size_t>(i)] = blk.gamma_lo + step * i;
  const auto logp = gamma_log_conditional(blk, grid);
  const auto draw = griddy_sample(rng, logp, blk.gamma_lo, blk.gamma_hi);
  blk.gamma = draw.value;
  blk.refresh_indicators();
  return draw.all_zero;
}

void sample_xi(Rng& rng, EvolutionBlock& blk) {
  const std::size_t n = blk.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double resid = (blk.h[k + 1] - blk.mu) - blk.phi_at(k) * (blk.h[k] - blk.mu);
    blk.eta[k + 1] = resid;
    blk.xi[k + 1] = sample_polya_gamma(rng, resid);
  }
  blk.eta[0] = blk.h[0] - blk.mu;
}

void sweep_evolution(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors, int grid_size) {
  sample_indicators(rng, blk);
  sample_h(rng, blk);
  sample_mu(rng, blk);
  sample_phi1(rng, blk, priors);
  sample_phi2(rng, blk, priors);
  sample_gamma(rng, blk, grid_size);
  sample_xi(rng, blk);
}

// ---------------------------------------------------------------------------

NoiseState make_noise(std::size_t t_len, double initial_var, bool stochastic) {
  NoiseState noise;
  noise.stochastic = stochastic;
  noise.sigma2.assign(t_len, initial_var);
  noise.log_var.assign(t_len, std::log(initial_var));
  noise.r.assign(t_len, 4);
  noise.mu = std::log(initial_var);
  return noise;
}

namespace {

void sample_constant_noise(Rng& rng, NoiseState& noise, std::span<const double> residual, const PriorHyper& p) {
  double ss = 0.0;
  for (double e : residual) ss += e * e;
  const double shape = p.noise_ig_shape + 0.5 * static_cast<double>(residual.size());
  const double v = clamp_positive(sample_inverse_gamma(rng, shape, p.noise_ig_scale + 0.5 * ss));
  std::fill(noise.sigma2.begin(), noise.sigma2.end(), v);
  std::fill(noise.log_var.begin(), noise.log_var.end(), std::log(v));
  noise.mu = std::log(v);
}

// Stationary AR(1) prior precision of the centred log-variances.
SymBanded ar1_precision(std::size_t n, double phi, double var) {
  SymBanded q(n, 1);
  for (std::size_t t = 0; t < n; ++t) {
    const bool edge = t == 0 || t + 1 == n;
    q.at(t, t) = (edge ? 1.0 : 1.0 + phi * phi) / var;
    if (t + 1 < n) q.at(t + 1, t) = -phi / var;
  }
  if (n == 1) q.at(0, 0) = (1.0 - phi * phi) / var;
  return q;
}

void sample_sv_noise(Rng& rng, NoiseState& noise, std::span<const double> residual, const PriorHyper& p) {
  const auto& tab = mixture_table();
  const std::size_t n = residual.size();
  std::vector<double> z(n);
  for (std::size_t t = 0; t < n; ++t) {
    z[t] = std::log(residual[t] * residual[t] + kLogOffset);
    noise.r[t] = sample_mixture_indicator(rng, z[t], noise.log_var[t], tab);
  }

  // joint draw of the centred log-variances
  auto q = ar1_precision(n, noise.phi, noise.sigma_xi2);
  std::vector<double> l(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double v = tab.variances[noise.r[t]];
    q.add(t, t, 1.0 / v);
    l[t] = (z[t] - tab.means[noise.r[t]] - noise.mu) / v;
  }
  const auto centred = BandedCholesky(q).sample(rng, l);
  for (std::size_t t = 0; t < n; ++t) noise.log_var[t] = centred[t] + noise.mu;

  // level
  {
    const auto prior = ar1_precision(n, noise.phi, noise.sigma_xi2);
    double qm = 1.0 / (p.sv_mu_prior_sd * p.sv_mu_prior_sd);
    double lm = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double row = 0.0;
      for (std::size_t u = (t > 0 ? t - 1 : 0); u <= std::min(n - 1, t + 1); ++u) row += prior.get(t, u);
      qm += row;
      lm += row * noise.log_var[t];
    }
    noise.mu = lm / qm + rng.normal() / std::sqrt(qm);
  }

  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t) g[t] = noise.log_var[t] - noise.mu;

  // persistence
  Quadratic quad;
  for (std::size_t t = 1; t < n; ++t) quad.add(1.0, g[t], g[t - 1]);
  const double g0sq = g[0] * g[0];
  auto logf = [&](double x) {
    const double phi = 2.0 * x - 1.0;
    const double one_minus = std::max(1.0 - phi * phi, 1e-300);
    return -0.5 * (quad.at(phi) + one_minus * g0sq) / noise.sigma_xi2 + 0.5 * std::log(one_minus) +
           log_beta_pdf(x, p.sv_phi_beta_a, p.sv_phi_beta_b);
  };
  noise.phi = 2.0 * slice_sample(rng, logf, 0.5 * (noise.phi + 1.0), 0.0, 1.0) - 1.0;

  // innovation variance
  const double ss = quad.at(noise.phi) + (1.0 - noise.phi * noise.phi) * g0sq;
  noise.sigma_xi2 = clamp_positive(
      sample_inverse_gamma(rng, p.sv_sigma_ig_shape + 0.5 * static_cast<double>(n), p.sv_sigma_ig_scale + 0.5 * ss));

  for (std::size_t t = 0; t < n; ++t) noise.sigma2[t] = std::exp(std::clamp(noise.log_var[t], -kClipH, kClipH));
}

}  // namespace

void sample_noise(Rng& rng, NoiseState& noise, std::span<const double> residual, const PriorHyper& priors) {
  if (noise.stochastic)
    sample_sv_noise(rng, noise, residual, priors);
  else
    sample_constant_noise(rng, noise, residual, priors);
}

// ---------------------------------------------------------------------------

OutlierState make_outliers(std::size_t t_len, double noise_scale, const PriorHyper& priors) {
  OutlierState out;
  const double s2 = noise_scale * noise_scale;
  out.zeta.assign(t_len, 0.0);
  out.lambda2.assign(t_len, s2);
  out.nu.assign(t_len, s2);
  out.eta2.assign(t_len, 1.0);
  out.iota.assign(t_len, 1.0);
  out.tau2 = s2;
  out.xi_aux = s2;
  out.global_scale2 = s2 * priors.outlier_global_scale * priors.outlier_global_scale;
  out.local_scale2 = priors.outlier_local_scale * priors.outlier_local_scale;
  return out;
}

void sample_outliers(Rng& rng, OutlierState& out, std::span<const double> signal_resid,
                     std::span<const double> sigma2) {
  const std::size_t n = signal_resid.size();
  for (std::size_t t = 0; t < n; ++t) {
    const double v = 1.0 / (1.0 / out.lambda2[t] + 1.0 / sigma2[t]);
    const double m = v * signal_resid[t] / sigma2[t];
    out.zeta[t] = m + std::sqrt(v) * rng.normal();
  }
  for (std::size_t t = 0; t < n; ++t)
    out.lambda2[t] = clamp_positive(sample_inverse_gamma(rng, 1.0, 1.0 / out.nu[t] + 0.5 * out.zeta[t] * out.zeta[t]));
  for (std::size_t t = 0; t < n; ++t)
    out.nu[t] = clamp_positive(
        sample_inverse_gamma(rng, 1.0, 1.0 / out.lambda2[t] + 1.0 / (out.tau2 * out.eta2[t])));
  double acc = 1.0 / out.xi_aux;
  for (std::size_t t = 0; t < n; ++t) acc += 1.0 / (out.nu[t] * out.eta2[t]);
  out.tau2 = clamp_positive(sample_inverse_gamma(rng, 0.5 * static_cast<double>(n + 1), acc));
  out.xi_aux = clamp_positive(sample_inverse_gamma(rng, 1.0, 1.0 / out.global_scale2 + 1.0 / out.tau2));
  for (std::size_t t = 0; t < n; ++t)
    out.eta2[t] = clamp_positive(sample_inverse_gamma(rng, 1.0, 1.0 / out.iota[t] + 1.0 / (out.nu[t] * out.tau2)));
  for (std::size_t t = 0; t < n; ++t)
    out.iota[t] = clamp_positive(sample_inverse_gamma(rng, 1.0, 1.0 / out.local_scale2 + 1.0 / out.eta2[t]));
}

double robust_noise_scale(std::span<const double> y) {
  if (y.size() >= 3) {
    auto dy = diff(y, 1);
    const auto mid = dy.begin() + static_cast<std::ptrdiff_t>(dy.size() / 2);
    std::nth_element(dy.begin(), mid, dy.end());
    const double med = *mid;
    for (auto& v : dy) v = std::fabs(v - med);
    std::nth_element(dy.begin(), mid, dy.end());
    const double mad = 1.4826 * *mid / std::sqrt(2.0);
    if (mad > 0.0) return mad;
  }
  const double sd = std::sqrt(variance(y));
  return sd > 0.0 ? sd : 1.0;
}

double gaussian_deviance(std::span<const double> y, std::span<const double> fit, std::span<const double> var) {
  constexpr double log2pi = 1.8378770664093453;
  double dev = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double e = y[t] - fit[t];
    dev += log2pi + std::log(var[t]) + e * e / var[t];
  }
  return dev;
}

// ---------------------------------------------------------------------------

LatentState init_state(const TimeSeries& series, const ModelConfig& config) {
  validate_config(config, series).throw_if_failed();
  const auto& y = series.values;
  const std::size_t t_len = y.size();
  LatentState st;
  st.beta = y;
  const auto inc = diff(y, config.d);
  double ms = 0.0;
  for (double w : inc) ms += w * w;
  ms /= static_cast<double>(inc.size());
  const double h0 = std::log(ms + kLogOffset);
  const double var_y = std::max(variance(y), 1e-12);
  const double scale = config.priors.tau_scale_factor;
  const double anchor = std::log(var_y * scale * scale / static_cast<double>(t_len));
  st.evo = make_evolution(inc, h0, anchor, gamma_bounds(y, config.d), config.horseshoe);

  const auto dy = diff(y, 1);
  const double init_var = std::max(variance(dy) / 2.0, 1e-8);
  st.noise = make_noise(t_len, init_var, config.use_sv_noise);
  st.outliers = make_outliers(t_len, robust_noise_scale(y), config.priors);
  return st;
}

GibbsChain::GibbsChain(const TimeSeries& series, const ModelConfig& config, std::optional<InterventionSpec> its)
    : y_(series.values), config_(config), its_(its), rng_(config.seed), state_(init_state(series, config)) {
  if (its_) {
    if (config.d != 2) throw Error(ErrorCode::BadParam, "interrupted time series requires d = 2");
    const std::size_t t_len = y_.size();
    if (its_->pi < 3 || its_->pi + 2 > t_len)
      throw Error(ErrorCode::BadPi, "intervention index must lie in [3, T - 2]");
    if (!(its_->upsilon_var > 0.0)) throw Error(ErrorCode::BadParam, "upsilon variance must be positive");
    state_.upsilon.assign(2, 0.0);
  }
}

void GibbsChain::sample_beta() {
  const std::size_t t_len = y_.size();
  const std::size_t n = state_.evo.size();
  const auto& sigma2 = state_.noise.sigma2;
  const auto& zeta = state_.outliers.zeta;
  std::vector<double> l(t_len);
  for (std::size_t t = 0; t < t_len; ++t) l[t] = (y_[t] - zeta[t]) / sigma2[t];

  auto attempt = [&](double clip) {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = std::exp(-std::clamp(state_.evo.h[k], -clip, clip));
    if (its_) {
      for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t k = its_->pi - 2 + j;
        w[k] = 1.0 / (1.0 / w[k] + its_->upsilon_var);
      }
    }
    auto q = build_difference_precision(t_len, config_.d, w);
    for (std::size_t t = 0; t < t_len; ++t) q.add(t, t, 1.0 / sigma2[t]);
    return BandedCholesky(q).sample(rng_, l);
  };
  try {
    state_.beta = attempt(kClipH);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    state_.beta = attempt(kClipRetry);
  }

  auto inc = diff(state_.beta, config_.d);
  if (its_) {
    for (std::size_t j = 0; j < 2; ++j) {
      const std::size_t k = its_->pi - 2 + j;
      const double ev = std::exp(std::clamp(state_.evo.h[k], -kClipH, kClipH));
      const double su = its_->upsilon_var;
      const double mean = su / (ev + su) * inc[k];
      const double var = ev * su / (ev + su);
      state_.upsilon[j] = mean + std::sqrt(var) * rng_.normal();
      inc[k] -= state_.upsilon[j];
    }
  }
  state_.evo.omega = std::move(inc);
  state_.evo.refresh_indicators();
}

void GibbsChain::sweep_impl() {
  sweep_evolution(rng_, state_.evo, config_.priors, config_.grid_size);

  const std::size_t t_len = y_.size();
  std::vector<double> resid(t_len);
  if (config_.use_outliers) {
    for (std::size_t t = 0; t < t_len; ++t) resid[t] = y_[t] - state_.beta[t];
    sample_outliers(rng_, state_.outliers, resid, state_.noise.sigma2);
  }
  for (std::size_t t = 0; t < t_len; ++t) resid[t] = y_[t] - state_.beta[t] - state_.outliers.zeta[t];
  sample_noise(rng_, state_.noise, resid, config_.priors);

  sample_beta();
}

void GibbsChain::sweep() {
  try {
    sweep_impl();
  } catch (const Error& e) {
    throw Error(ErrorCode::SamplerFailure, "iteration " + std::to_string(iteration_) + ": " + e.what());
  }
  ++iteration_;
}

void GibbsChain::record(PosteriorDraws& out) {
  const auto& st = state_;
  const std::size_t t_len = y_.size();
  out.beta.insert(out.beta.end(), st.beta.begin(), st.beta.end());
  out.zeta.insert(out.zeta.end(), st.outliers.zeta.begin(), st.outliers.zeta.end());
  if (config_.use_outliers)
    out.zeta_var.insert(out.zeta_var.end(), st.outliers.lambda2.begin(), st.outliers.lambda2.end());
  else
    out.zeta_var.insert(out.zeta_var.end(), t_len, 0.0);
  out.sigma_eps2.insert(out.sigma_eps2.end(), st.noise.sigma2.begin(), st.noise.sigma2.end());
  for (std::size_t k = 0; k < st.evo.size(); ++k) out.log_omega2.push_back(st.evo.log_omega2(k));
  out.h.insert(out.h.end(), st.evo.h.begin(), st.evo.h.end());
  out.gamma.push_back(st.evo.gamma);
  out.mu.push_back(st.evo.mu);
  out.phi1.push_back(st.evo.phi1);
  out.phi2.push_back(st.evo.phi2);
  out.tau2.push_back(std::exp(st.evo.mu));
  out.noise_mu.push_back(st.noise.mu);
  out.noise_phi.push_back(st.noise.phi);
  out.noise_sigma2.push_back(st.noise.sigma_xi2);

  std::vector<double> fit(t_len);
  for (std::size_t t = 0; t < t_len; ++t) fit[t] = st.beta[t] + st.outliers.zeta[t];
  out.deviance.push_back(gaussian_deviance(y_, fit, st.noise.sigma2));
  ++out.count;

  if (its_) {
    const auto& b = st.beta;
    const std::size_t p = its_->pi;
    level_shift_.push_back(b[p] - b[p - 1]);
    slope_change_.push_back((b[p + 1] - b[p]) - (b[p - 1] - b[p - 2]));
  }
}

PosteriorDraws GibbsChain::run(const ProgressFn& progress) {
  PosteriorDraws out;
  const std::size_t t_len = y_.size();
  out.t_len = t_len;
  out.d = config_.d;
  out.method = config_.horseshoe ? "horseshoe" : "abco";
  out.outliers_enabled = config_.use_outliers;
  out.sv_noise = config_.use_sv_noise;
  const auto m = static_cast<std::size_t>(config_.retained());
  out.beta.reserve(m * t_len);
  out.log_omega2.reserve(m * state_.evo.size());

  for (int it = 0; it < config_.iters; ++it) {
    sweep();
    if (it >= config_.burn && (it - config_.burn + 1) % config_.thin == 0) record(out);
    if (progress) progress(it + 1, config_.iters);
  }

  std::vector<double> beta_bar(t_len, 0.0), zeta_bar(t_len, 0.0), var_bar(t_len, 0.0);
  for (std::size_t i = 0; i < out.count; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      beta_bar[t] += out.beta[i * t_len + t];
      zeta_bar[t] += out.zeta[i * t_len + t];
      var_bar[t] += out.sigma_eps2[i * t_len + t];
    }
  }
  if (out.count > 0) {
    const double inv = 1.0 / static_cast<double>(out.count);
    for (std::size_t t = 0; t < t_len; ++t) {
      beta_bar[t] = (beta_bar[t] + zeta_bar[t]) * inv;
      var_bar[t] *= inv;
    }
    out.deviance_at_mean = gaussian_deviance(y_, beta_bar, var_bar);
  }
  return out;
}

PosteriorDraws run(const TimeSeries& series, const ModelConfig& config, const ProgressFn& progress) {
  return GibbsChain(series, config).run(progress);
}

}  // namespace abco
