#include "abco/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace abco {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadBounds: return "BadBounds";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::DegenerateBounds: return "DegenerateBounds";
    case ErrorCode::ComponentDisabled: return "ComponentDisabled";
    case ErrorCode::BadCps: return "BadCps";
    case ErrorCode::BadPi: return "BadPi";
    case ErrorCode::SamplerFailure: return "SamplerFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
  return out;
}

bool ValidationResult::has(ErrorCode code) const noexcept {
  for (const auto& issue : issues)
    if (issue.code == code) return true;
  return false;
}

void ValidationResult::throw_if_failed() const {
  if (!issues.empty()) throw Error(issues.front().code, issues.front().message);
}

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void check_priors(const PriorHyper& p, std::vector<ValidationIssue>& out) {
  auto need_positive = [&](double value, const char* name) {
    if (!positive_finite(value))
      out.push_back({ErrorCode::BadBounds, std::string(name) + " must be strictly positive"});
  };
  need_positive(p.z_alpha, "priors.z_alpha");
  need_positive(p.z_beta, "priors.z_beta");
  need_positive(p.phi1_beta_a, "priors.phi1_beta_a");
  need_positive(p.phi1_beta_b, "priors.phi1_beta_b");
  need_positive(p.phi2_sd, "priors.phi2_sd");
  need_positive(p.tau_scale_factor, "priors.tau_scale_factor");
  need_positive(p.outlier_global_scale, "priors.outlier_global_scale");
  need_positive(p.outlier_local_scale, "priors.outlier_local_scale");
  need_positive(p.sv_mu_prior_sd, "priors.sv_mu_prior_sd");
  need_positive(p.sv_phi_beta_a, "priors.sv_phi_beta_a");
  need_positive(p.sv_phi_beta_b, "priors.sv_phi_beta_b");
  need_positive(p.sv_sigma_ig_shape, "priors.sv_sigma_ig_shape");
  need_positive(p.sv_sigma_ig_scale, "priors.sv_sigma_ig_scale");
  need_positive(p.noise_ig_shape, "priors.noise_ig_shape");
  need_positive(p.noise_ig_scale, "priors.noise_ig_scale");
  if (!std::isfinite(p.phi2_mean))
    out.push_back({ErrorCode::BadBounds, "priors.phi2_mean must be finite"});
}

}  // namespace

ValidationResult validate_config(const ModelConfig& config, const TimeSeries& series) {
  ValidationResult result;
  auto& out = result.issues;

  if (config.d < 1 || config.d > kMaxOrder) {
    out.push_back({ErrorCode::BadBounds, "d must be in {1, 2, 3}, got " + std::to_string(config.d)});
  }
  if (config.iters < 1) out.push_back({ErrorCode::BadBounds, "iters must be >= 1"});
  if (config.burn < 0 || config.burn >= config.iters)
    out.push_back({ErrorCode::BadBounds, "burn must satisfy 0 <= burn < iters"});
  if (config.thin < 1) out.push_back({ErrorCode::BadBounds, "thin must be >= 1"});
  if (config.grid_size < 2) out.push_back({ErrorCode::BadBounds, "grid_size must be >= 2"});
  if (!(config.cp_prob_cutoff > 0.0 && config.cp_prob_cutoff < 1.0))
    out.push_back({ErrorCode::BadBounds, "cp_prob_cutoff must lie in (0, 1)"});
  if (!(config.outlier_cutoff > 0.0 && config.outlier_cutoff < 1.0))
    out.push_back({ErrorCode::BadBounds, "outlier_cutoff must lie in (0, 1)"});
  if (config.min_cp_separation < 1) out.push_back({ErrorCode::BadBounds, "min_cp_separation must be >= 1"});
  check_priors(config.priors, out);

  const std::size_t t_len = series.size();
  const int d = std::clamp(config.d, 1, kMaxOrder);
  if (t_len < static_cast<std::size_t>(2 * d + 2)) {
    std::ostringstream msg;
    msg << "series length " << t_len << " < 2*d+2 = " << 2 * d + 2;
    out.push_back({ErrorCode::SeriesTooShort, msg.str()});
  }
  for (std::size_t t = 0; t < t_len; ++t) {
    if (!std::isfinite(series.values[t])) {
      out.push_back({ErrorCode::NonFinite, "value at index " + std::to_string(t) + " is not finite"});
      break;
    }
  }
  if (series.design) {
    const auto& x = *series.design;
    if (x.rows != t_len || x.cols < 1 || x.data.size() != x.rows * x.cols) {
      out.push_back({ErrorCode::DimensionMismatch, "design must have T rows and p >= 1 columns"});
    } else {
      for (double v : x.data) {
        if (!std::isfinite(v)) {
          out.push_back({ErrorCode::NonFinite, "design contains a non-finite entry"});
          break;
        }
      }
    }
  }
  if (!series.labels.empty() && series.labels.size() != t_len)
    out.push_back({ErrorCode::DimensionMismatch, "labels must be empty or have length T"});
  return result;
}

std::vector<double> diff(std::span<const double> values, int d) {
  if (d < 0) throw Error(ErrorCode::BadParam, "difference order must be non-negative");
  if (values.size() <= static_cast<std::size_t>(d))
    throw Error(ErrorCode::TooShort, "diff needs more than d values");
  std::vector<double> out(values.begin(), values.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

std::vector<double> difference_coefficients(int d) {
  std::vector<double> coef{1.0};
  for (int k = 0; k < d; ++k) {
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t j = 0; j < coef.size(); ++j) {
      next[j] -= coef[j];
      next[j + 1] += coef[j];
    }
    coef = std::move(next);
  }
  return coef;
}

std::vector<double> integrate(std::span<const double> initial, std::span<const double> increments) {
  const auto d = initial.size();
  const auto coef = difference_coefficients(static_cast<int>(d));
  std::vector<double> out(initial.begin(), initial.end());
  out.reserve(d + increments.size());
  for (std::size_t k = 0; k < increments.size(); ++k) {
    // increments[k] = sum_j coef[j] * out[k + j], coef[d] == 1
    double acc = increments[k];
    for (std::size_t j = 0; j < d; ++j) acc -= coef[j] * out[k + j];
    out.push_back(acc);
  }
  return out;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace abco
