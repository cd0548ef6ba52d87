#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abco/banded.hpp"
#include "abco/core.hpp"
#include "abco/random.hpp"

namespace abco {

/// Threshold-SV shrinkage process on the increments omega = diff(beta, d).
/// Index k runs over increments; xi[0] is the precision of the initial centred
/// log-variance, xi[k + 1] the precision of the innovation entering h[k + 1].
struct EvolutionBlock {
  std::vector<double> omega;
  std::vector<double> h;
  std::vector<std::uint8_t> s;
  std::vector<int> r;
  std::vector<double> xi;
  std::vector<double> eta;
  double mu = 0.0;
  double phi1 = 0.9;
  double phi2 = -1.0;
  double gamma = 0.0;
  double xi_mu = 1.0;
  /// Centre of the Z prior on mu (log of the squared half-Cauchy scale).
  double anchor = 0.0;
  double gamma_lo = -1.0;
  double gamma_hi = 1.0;
  /// Static horseshoe: phi1 = phi2 = 0 are never updated.
  bool frozen_phi = false;

  std::size_t size() const noexcept { return omega.size(); }
  double phi_at(std::size_t k) const noexcept { return phi1 + phi2 * s[k]; }
  double log_omega2(std::size_t k) const noexcept { return std::log(omega[k] * omega[k] + kLogOffset); }
  /// s[k] = 1{log(omega[k]^2 + c) > gamma}.
  void refresh_indicators();
  std::vector<double> centered() const;
};

/// Sets omega, h = log(mean(omega0^2) + c), mu = h, gamma at the bracket midpoint.
EvolutionBlock make_evolution(std::span<const double> omega, double initial_log_var, double anchor,
                              std::pair<double, double> gamma_bracket, bool frozen_phi);

/// (min, max) of log((diff(y, d))^2 + c); widened by +-1 when degenerate.
std::pair<double, double> gamma_bounds(std::span<const double> y, int d);
/// As gamma_bounds, but reports whether the widening was needed.
std::pair<double, double> gamma_bounds(std::span<const double> y, int d, bool& degenerate);

struct GaussianTerms {
  SymBanded q;
  std::vector<double> l;
};

/// Precision and linear term of the centred log-variances given r, xi, mu, phi, s.
GaussianTerms h_conditional(const EvolutionBlock& blk);
/// Scalar precision / linear term of mu given h, xi, phi, s.
std::pair<double, double> mu_conditional(const EvolutionBlock& blk);
/// Log full conditional of x = (phi1 + 1) / 2, up to a constant.
double phi1_log_conditional(const EvolutionBlock& blk, double x, const PriorHyper& priors);
double phi2_log_conditional(const EvolutionBlock& blk, double x, const PriorHyper& priors);
/// Log full conditional of the threshold evaluated at each grid value (ascending).
std::vector<double> gamma_log_conditional(const EvolutionBlock& blk, std::span<const double> grid);

void sample_indicators(Rng& rng, EvolutionBlock& blk);
void sample_h(Rng& rng, EvolutionBlock& blk);
/// Draws mu, then refreshes xi_mu and xi[0].
void sample_mu(Rng& rng, EvolutionBlock& blk);
void sample_phi1(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors);
void sample_phi2(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors);
/// Returns true when every grid value underflowed.
bool sample_gamma(Rng& rng, EvolutionBlock& blk, int grid_size);
/// xi[k + 1] ~ PG(1, eta[k]) with eta the AR residual of the centred log-variances.
void sample_xi(Rng& rng, EvolutionBlock& blk);
/// r -> h -> mu -> phi1 -> phi2 -> gamma/s -> xi.
void sweep_evolution(Rng& rng, EvolutionBlock& blk, const PriorHyper& priors, int grid_size);

/// Observation variance: SV(1) on log sigma^2, or one shared variance.
struct NoiseState {
  bool stochastic = true;
  std::vector<double> sigma2;
  std::vector<double> log_var;
  std::vector<int> r;
  double mu = 0.0;
  double phi = 0.9;
  double sigma_xi2 = 0.1;
};

NoiseState make_noise(std::size_t t_len, double initial_var, bool stochastic);
void sample_noise(Rng& rng, NoiseState& noise, std::span<const double> residual, const PriorHyper& priors);

/// Horseshoe+ additive outliers.
struct OutlierState {
  std::vector<double> zeta;
  std::vector<double> lambda2;
  std::vector<double> nu;
  std::vector<double> eta2;
  std::vector<double> iota;
  double tau2 = 1.0;
  double xi_aux = 1.0;
  double global_scale2 = 1.0;
  double local_scale2 = 1.0;
};

OutlierState make_outliers(std::size_t t_len, double noise_scale, const PriorHyper& priors);
/// `signal_resid` is y minus the fitted trend (outliers not yet removed).
void sample_outliers(Rng& rng, OutlierState& out, std::span<const double> signal_resid,
                     std::span<const double> sigma2);

/// 1.4826 * MAD(diff(y)) / sqrt(2), falling back to sd(y) then 1.
double robust_noise_scale(std::span<const double> y);

/// Extra diffuse increments at a known intervention (d = 2 only).
struct InterventionSpec {
  /// First post-intervention observation (0-based).
  std::size_t pi = 0;
  double upsilon_var = 0.0;
};

struct LatentState {
  std::vector<double> beta;
  EvolutionBlock evo;
  NoiseState noise;
  OutlierState outliers;
  /// Intervention terms at increments pi - 2 and pi - 1 (empty without ITS).
  std::vector<double> upsilon;
};

struct PosteriorDraws {
  std::size_t count = 0;
  std::size_t t_len = 0;
  int d = 0;
  std::string method = "abco";
  bool outliers_enabled = true;
  bool sv_noise = true;

  // count x t_len, row-major
  std::vector<double> beta;
  std::vector<double> zeta;
  std::vector<double> zeta_var;
  std::vector<double> sigma_eps2;
  // count x (t_len - d)
  std::vector<double> log_omega2;
  std::vector<double> h;
  // count
  std::vector<double> gamma;
  std::vector<double> mu;
  std::vector<double> phi1;
  std::vector<double> phi2;
  std::vector<double> tau2;
  std::vector<double> noise_mu;
  std::vector<double> noise_phi;
  std::vector<double> noise_sigma2;
  std::vector<double> deviance;
  double deviance_at_mean = std::numeric_limits<double>::quiet_NaN();

  std::size_t increments() const noexcept { return t_len - static_cast<std::size_t>(d); }
  std::span<const double> beta_row(std::size_t i) const { return {beta.data() + i * t_len, t_len}; }
  std::span<const double> log_omega2_row(std::size_t i) const {
    return {log_omega2.data() + i * increments(), increments()};
  }
  std::span<const double> h_row(std::size_t i) const { return {h.data() + i * increments(), increments()}; }
};

/// -2 sum log N(y_t; fit_t, var_t).
double gaussian_deviance(std::span<const double> y, std::span<const double> fit, std::span<const double> var);

using ProgressFn = std::function<void(int iteration, int total)>;

class GibbsChain {
 public:
  GibbsChain(const TimeSeries& series, const ModelConfig& config,
             std::optional<InterventionSpec> its = std::nullopt);

  /// One full sweep; sub-sampler errors surface as SamplerFailure with the iteration index.
  void sweep();
  /// All config.iters sweeps with burn-in and thinning; returns the retained draws.
  PosteriorDraws run(const ProgressFn& progress = {});
  /// Joint draw of beta given the current h, sigma2 and zeta; refreshes omega and s.
  void sample_beta();

  const LatentState& state() const noexcept { return state_; }
  LatentState& state() noexcept { return state_; }
  int iteration() const noexcept { return iteration_; }
  /// Retained draws of beta[pi] - beta[pi - 1] and of the slope change (ITS only).
  const std::vector<double>& level_shift_draws() const noexcept { return level_shift_; }
  const std::vector<double>& slope_change_draws() const noexcept { return slope_change_; }

 private:
  void sweep_impl();
  void record(PosteriorDraws& out);

  std::vector<double> y_;
  ModelConfig config_;
  std::optional<InterventionSpec> its_;
  Rng rng_;
  LatentState state_;
  int iteration_ = 0;
  std::vector<double> level_shift_;
  std::vector<double> slope_change_;
};

/// Builds the initial state (beta = y, h from the data increments, ...).
LatentState init_state(const TimeSeries& series, const ModelConfig& config);

PosteriorDraws run(const TimeSeries& series, const ModelConfig& config, const ProgressFn& progress = {});

}  // namespace abco
