#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "abco/banded.hpp"
#include "abco/gibbs.hpp"
#include "abco/random.hpp"

namespace abco::test {

// ---- dense oracles ------------------------------------------------------------

inline Eigen::MatrixXd to_dense(const SymBanded& q) {
  const auto n = static_cast<Eigen::Index>(q.dim());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = q.get(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

inline Eigen::MatrixXd factor_dense(const BandedCholesky& l) {
  const auto n = static_cast<Eigen::Index>(l.dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = l.factor(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

// Diagonally dominant random SPD matrix with the given band.
inline SymBanded random_spd(std::mt19937_64& gen, std::size_t n, std::size_t bw) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymBanded q(n, bw);
  std::vector<double> rowsum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= bw && k <= i; ++k) {
      const double v = u(gen);
      q.at(i, i - k) = v;
      rowsum[i] += std::fabs(v);
      rowsum[i - k] += std::fabs(v);
    }
  for (std::size_t i = 0; i < n; ++i) q.at(i, i) = rowsum[i] + 0.5 + std::fabs(u(gen));
  return q;
}

// Dense D^T diag(w) D built from the explicit difference matrix.
inline Eigen::MatrixXd dense_difference_precision(std::size_t t_len, int d, std::span<const double> w) {
  Eigen::MatrixXd dm = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(t_len), static_cast<Eigen::Index>(t_len));
  for (int k = 0; k < d; ++k) {
    const auto r = dm.rows() - 1;
    dm = (dm.bottomRows(r) - dm.topRows(r)).eval();
  }
  Eigen::VectorXd wv(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) wv(static_cast<Eigen::Index>(i)) = w[i];
  return dm.transpose() * wv.asDiagonal() * dm;
}

// ---- partition metrics by brute-force pair counting --------------------------------

inline std::vector<int> labels_of(std::span<const std::size_t> cps, std::size_t t_len) {
  std::vector<int> lab(t_len, 0);
  for (std::size_t t = 0; t < t_len; ++t)
    lab[t] = static_cast<int>(std::count_if(cps.begin(), cps.end(), [&](std::size_t c) { return c <= t; }));
  return lab;
}

struct PairCounts {
  double same_same = 0, same_diff = 0, diff_same = 0, diff_diff = 0;
};

inline PairCounts count_pairs(std::span<const int> a, std::span<const int> b) {
  PairCounts pc;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) pc.same_same += 1;
      else if (sa) pc.same_diff += 1;
      else if (sb) pc.diff_same += 1;
      else pc.diff_diff += 1;
    }
  return pc;
}

inline double brute_rand(std::span<const int> a, std::span<const int> b) {
  const auto pc = count_pairs(a, b);
  const double total = pc.same_same + pc.same_diff + pc.diff_same + pc.diff_diff;
  return total == 0 ? 1.0 : (pc.same_same + pc.diff_diff) / total;
}

// Pair-count form of the Hubert-Arabie index.
inline double brute_ari(std::span<const int> a, std::span<const int> b) {
  const auto pc = count_pairs(a, b);
  const double num = 2.0 * (pc.same_same * pc.diff_diff - pc.same_diff * pc.diff_same);
  const double den = (pc.same_same + pc.same_diff) * (pc.same_diff + pc.diff_diff) +
                     (pc.same_same + pc.diff_same) * (pc.diff_same + pc.diff_diff);
  return den == 0 ? 1.0 : num / den;
}

// ---- exhaustive optimal partitioning --------------------------------------------

// Minimises sum of within-segment squared deviations + penalty per segment over every
// segmentation with segments of length >= min_seg. O(T^2) with direct sums, no pruning.
inline std::vector<std::size_t> exhaustive_partition(std::span<const double> x, double penalty, std::size_t min_seg) {
  const std::size_t n = x.size();
  auto cost = [&](std::size_t a, std::size_t b) {
    double m = 0;
    for (std::size_t i = a; i < b; ++i) m += x[i];
    m /= static_cast<double>(b - a);
    double s = 0;
    for (std::size_t i = a; i < b; ++i) s += (x[i] - m) * (x[i] - m);
    return s;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> f(n + 1, inf);
  std::vector<std::size_t> arg(n + 1, 0);
  f[0] = 0;
  for (std::size_t t = min_seg; t <= n; ++t)
    for (std::size_t s = 0; s + min_seg <= t; ++s) {
      if (!std::isfinite(f[s])) continue;
      const double v = f[s] + cost(s, t) + penalty;
      if (v < f[t]) {
        f[t] = v;
        arg[t] = s;
      }
    }
  std::vector<std::size_t> cps;
  for (std::size_t t = n; arg[t] > 0; t = arg[t]) cps.push_back(arg[t]);
  std::reverse(cps.begin(), cps.end());
  return cps;
}

// ---- Kolmogorov-Smirnov ------------------------------------------------------

inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Asymptotic p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double p = 0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

// ---- prior draws of the evolution block --------------------------------------------

// log of a squared standard half-Cauchy: the Z(1/2, 1/2) innovation.
inline double draw_z(Rng& rng) { return 2.0 * std::log(std::tan(0.5 * std::numbers::pi * rng.uniform())); }
inline double z_cdf(double x) { return 2.0 / std::numbers::pi * std::atan(std::exp(0.5 * x)); }
// CDF of phi1 when (phi1 + 1) / 2 ~ Beta(10, 2).
inline double phi1_cdf(double phi) {
  const double x = std::clamp(0.5 * (phi + 1.0), 0.0, 1.0);
  return 11.0 * std::pow(x, 10) - 10.0 * std::pow(x, 11);
}

// Forward simulation of every evolution quantity from the prior, in generative order:
// h[k] -> log omega^2[k] (mixture) -> s[k] -> h[k + 1]. Auxiliaries drawn from their conditionals.
inline EvolutionBlock simulate_evolution_prior(Rng& rng, std::size_t n, const PriorHyper& pr, double anchor,
                                               double gamma_lo, double gamma_hi) {
  const auto& tab = mixture_table();
  EvolutionBlock blk;
  blk.anchor = anchor;
  blk.gamma_lo = gamma_lo;
  blk.gamma_hi = gamma_hi;
  const double ga = rng.gamma(pr.phi1_beta_a), gb = rng.gamma(pr.phi1_beta_b);
  blk.phi1 = 2.0 * ga / (ga + gb) - 1.0;
  blk.phi2 = sample_trunc_normal(rng, pr.phi2_mean, pr.phi2_sd, -10.0, 0.0);
  blk.gamma = gamma_lo + (gamma_hi - gamma_lo) * rng.uniform();
  blk.mu = anchor + draw_z(rng);
  blk.h.resize(n);
  blk.omega.resize(n);
  blk.s.resize(n);
  blk.r.resize(n);
  blk.eta.resize(n);
  blk.xi.resize(n);
  blk.eta[0] = draw_z(rng);
  blk.h[0] = blk.mu + blk.eta[0];
  for (std::size_t k = 0; k < n; ++k) {
    double u = rng.uniform();
    int r = 0;
    while (r < 9 && u > tab.weights[static_cast<std::size_t>(r)]) u -= tab.weights[static_cast<std::size_t>(r++)];
    const auto ur = static_cast<std::size_t>(r);
    const double z = blk.h[k] + tab.means[ur] + std::sqrt(tab.variances[ur]) * rng.normal();
    blk.omega[k] = std::sqrt(std::max(std::exp(z) - kLogOffset, 1e-300));
    blk.r[k] = r;
    blk.s[k] = blk.log_omega2(k) > blk.gamma ? 1 : 0;
    if (k + 1 < n) {
      blk.eta[k + 1] = draw_z(rng);
      blk.h[k + 1] = blk.mu + blk.phi_at(k) * (blk.h[k] - blk.mu) + blk.eta[k + 1];
    }
  }
  for (std::size_t k = 0; k < n; ++k) blk.xi[k] = sample_polya_gamma(rng, blk.eta[k]);
  blk.xi_mu = sample_polya_gamma(rng, blk.mu - anchor);
  return blk;
}

// ---- scratch directory -------------------------------------------------------

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("abco_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace abco::test
