#include "abco/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "abco/detect.hpp"
#include "abco/extensions.hpp"
#include "abco/gibbs.hpp"

namespace abco {

namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

struct PairCounts {
  double same_both = 0.0;  // sum_ij C(n_ij, 2)
  double same_a = 0.0;     // sum_i C(a_i, 2)
  double same_b = 0.0;     // sum_j C(b_j, 2)
  double total = 0.0;      // C(T, 2)
};

void check_cps(std::span<const std::size_t> cps, std::size_t t_len) {
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == 0 || cps[i] >= t_len) throw Error(ErrorCode::BadCps, "changepoints must lie in [1, T)");
    if (i > 0 && cps[i] <= cps[i - 1]) throw Error(ErrorCode::BadCps, "changepoints must be strictly increasing");
  }
}

// Segment boundaries are intervals, so the contingency table is filled by a merge walk.
PairCounts counts_from_cps(std::span<const std::size_t> a, std::span<const std::size_t> b, std::size_t t_len) {
  check_cps(a, t_len);
  check_cps(b, t_len);
  PairCounts pc;
  pc.total = choose2(static_cast<double>(t_len));
  auto seg_sizes = [&](std::span<const std::size_t> cps) {
    double acc = 0.0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= cps.size(); ++i) {
      const std::size_t end = i < cps.size() ? cps[i] : t_len;
      acc += choose2(static_cast<double>(end - start));
      start = end;
    }
    return acc;
  };
  pc.same_a = seg_sizes(a);
  pc.same_b = seg_sizes(b);
  std::size_t ia = 0, ib = 0, start = 0;
  while (start < t_len) {
    const std::size_t ea = ia < a.size() ? a[ia] : t_len;
    const std::size_t eb = ib < b.size() ? b[ib] : t_len;
    const std::size_t end = std::min(ea, eb);
    pc.same_both += choose2(static_cast<double>(end - start));
    if (ea == end) ++ia;
    if (eb == end) ++ib;
    start = end;
  }
  return pc;
}

PairCounts counts_from_labels(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "labelings differ in length");
  std::map<int, double> na, nb;
  std::map<std::pair<int, int>, double> nab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na[a[i]] += 1.0;
    nb[b[i]] += 1.0;
    nab[{a[i], b[i]}] += 1.0;
  }
  PairCounts pc;
  pc.total = choose2(static_cast<double>(a.size()));
  for (const auto& [k, v] : na) pc.same_a += choose2(v);
  for (const auto& [k, v] : nb) pc.same_b += choose2(v);
  for (const auto& [k, v] : nab) pc.same_both += choose2(v);
  return pc;
}

double rand_from(const PairCounts& pc) {
  if (pc.total <= 0.0) return 1.0;
  const double agree = pc.total + 2.0 * pc.same_both - pc.same_a - pc.same_b;
  return agree / pc.total;
}

double ari_from(const PairCounts& pc) {
  if (pc.total <= 0.0) return 1.0;
  const double expected = pc.same_a * pc.same_b / pc.total;
  const double max_index = 0.5 * (pc.same_a + pc.same_b);
  const double denom = max_index - expected;
  if (std::fabs(denom) < 1e-12) return 1.0;
  return (pc.same_both - expected) / denom;
}

}  // namespace

double rand_index(std::span<const std::size_t> pred, std::span<const std::size_t> truth, std::size_t t_len) {
  return rand_from(counts_from_cps(pred, truth, t_len));
}

double adjusted_rand(std::span<const std::size_t> pred, std::span<const std::size_t> truth, std::size_t t_len) {
  return ari_from(counts_from_cps(pred, truth, t_len));
}

double rand_index_labels(std::span<const int> a, std::span<const int> b) { return rand_from(counts_from_labels(a, b)); }

double adjusted_rand_labels(std::span<const int> a, std::span<const int> b) { return ari_from(counts_from_labels(a, b)); }

CpMetrics cp_metrics(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  CpMetrics m;
  m.n_pred = pred.size();
  m.diff_cp_count = pred.size() > truth.size() ? pred.size() - truth.size() : truth.size() - pred.size();
  if (!pred.empty() && !truth.empty()) {
    double acc = 0.0;
    for (std::size_t p : pred) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (std::size_t t : truth) best = std::min(best, p > t ? p - t : t - p);
      acc += static_cast<double>(best);
    }
    m.avg_dist_to_true = acc / static_cast<double>(pred.size());
  }
  return m;
}

OutlierMetrics outlier_metrics(std::span<const std::size_t> flagged, std::span<const std::size_t> truth,
                               std::size_t t_len) {
  OutlierMetrics m;
  std::vector<bool> flag_used(flagged.size(), false), true_hit(truth.size(), false);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t f = 0; f < flagged.size(); ++f) {
      if (!flag_used[f] && flagged[f] == truth[i]) {
        flag_used[f] = true;
        true_hit[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (true_hit[i]) continue;
    for (std::size_t f = 0; f < flagged.size(); ++f) {
      const std::size_t dist = flagged[f] > truth[i] ? flagged[f] - truth[i] : truth[i] - flagged[f];
      if (!flag_used[f] && dist <= 1) {
        flag_used[f] = true;
        true_hit[i] = true;
        break;
      }
    }
  }
  const auto hits = static_cast<double>(std::count(true_hit.begin(), true_hit.end(), true));
  const auto stray = static_cast<double>(std::count(flag_used.begin(), flag_used.end(), false));
  if (!truth.empty()) m.tpr = hits / static_cast<double>(truth.size());
  if (t_len > truth.size()) m.fpr = stray / static_cast<double>(t_len - truth.size());
  return m;
}

double default_pelt_penalty(std::span<const double> values) {
  const double s = robust_noise_scale(values);
  return 2.0 * s * s * std::log(static_cast<double>(values.size()));
}

std::vector<std::size_t> pelt_baseline(std::span<const double> values, std::optional<double> penalty,
                                       std::size_t min_seg) {
  const std::size_t n = values.size();
  min_seg = std::max<std::size_t>(min_seg, 1);
  if (n < 2 * min_seg) throw Error(ErrorCode::TooShort, "PELT needs T >= 2 * min_seg");
  const double beta = penalty.value_or(default_pelt_penalty(values));
  const double centre = mean(values);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i] - centre;
    s1[i + 1] = s1[i] + v;
    s2[i + 1] = s2[i] + v * v;
  }
  auto cost = [&](std::size_t a, std::size_t b) {
    const double len = static_cast<double>(b - a);
    const double sum = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - sum * sum / len);
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> f(n + 1, inf);
  std::vector<std::size_t> last(n + 1, 0);
  f[0] = -beta;
  struct Cand {
    std::size_t tau;
    std::size_t pruned_at;
  };
  constexpr std::size_t kLive = std::numeric_limits<std::size_t>::max();
  std::vector<Cand> cands{{0, kLive}};
  const double tol = 1e-9 * (1.0 + s2[n]);

  for (std::size_t t = min_seg; t <= n; ++t) {
    // tau = t - min_seg becomes admissible once it is a feasible segment end
    if (t >= 2 * min_seg) cands.push_back({t - min_seg, kLive});
    double best = inf;
    std::size_t arg = 0;
    for (const auto& c : cands) {
      if (!std::isfinite(f[c.tau])) continue;
      const double v = f[c.tau] + cost(c.tau, t) + beta;
      if (v < best) {
        best = v;
        arg = c.tau;
      }
    }
    f[t] = best;
    last[t] = arg;
    // a pruned tau stays usable for ends that cannot host a split at t
    for (auto& c : cands) {
      if (c.pruned_at == kLive && std::isfinite(f[c.tau]) && f[c.tau] + cost(c.tau, t) > f[t] + tol)
        c.pruned_at = t;
    }
    std::erase_if(cands, [&](const Cand& c) { return c.pruned_at != kLive && t + 1 >= c.pruned_at + min_seg; });
  }

  std::vector<std::size_t> cps;
  for (std::size_t t = n; t > 0; t = last[t]) {
    if (last[t] > 0) cps.push_back(last[t]);
    if (last[t] == 0) break;
  }
  std::reverse(cps.begin(), cps.end());
  return cps;
}

// ---------------------------------------------------------------------------

namespace {

MethodResult fit_bayesian(const Simulation& sim, ModelConfig config) {
  MethodResult res;
  if (sim.series.design) {
    const auto draws = fit_regression(sim.series, config);
    for (std::size_t j = 0; j < draws.coef.size(); ++j) {
      const auto probs = cp_probability(draws.coef[j]);
      auto cps = changepoints_from_probs(probs, config.d, config.cp_prob_cutoff, config.min_cp_separation);
      res.per_predictor_cps.push_back(cps.size());
      if (j == 0) res.changepoints = std::move(cps);
    }
    return res;
  }
  const auto draws = run(sim.series, config);
  res.changepoints = changepoints_from_probs(cp_probability(draws), config.d, config.cp_prob_cutoff,
                                             config.min_cp_separation);
  if (config.use_outliers) res.flagged_outliers = outlier_scores(draws, config.outlier_cutoff).flagged;
  return res;
}

}  // namespace

Method builtin_method(const std::string& name) {
  if (name == "abco") {
    return {name, [](const Simulation& sim, const ModelConfig& cfg) {
              auto c = cfg;
              c.horseshoe = false;
              return fit_bayesian(sim, c);
            }};
  }
  if (name == "horseshoe") {
    return {name, [](const Simulation& sim, const ModelConfig& cfg) {
              auto c = cfg;
              c.horseshoe = true;
              return fit_bayesian(sim, c);
            }};
  }
  if (name == "pelt") {
    return {name, [](const Simulation& sim, const ModelConfig& cfg) {
              MethodResult res;
              const auto& y = sim.series.values;
              if (cfg.d >= 2) {
                const auto dy = diff(y, 1);
                for (std::size_t k : pelt_baseline(dy)) res.changepoints.push_back(k + 1);
              } else {
                res.changepoints = pelt_baseline(y);
              }
              return res;
            }};
  }
  throw Error(ErrorCode::BadParam, "unknown method '" + name + "'");
}

std::vector<BenchmarkRow> run_benchmark(const Scenario& scenario, int n_reps, const std::vector<Method>& methods,
                                        const ModelConfig& config, int jobs) {
  if (n_reps < 1) throw Error(ErrorCode::BadParam, "n_reps must be >= 1");
  const auto reps = static_cast<std::size_t>(n_reps);
  const std::size_t nm = methods.size();

  struct Cell {
    bool ok = false;
    MethodResult result;
  };
  std::vector<Simulation> sims(reps);
  std::vector<Cell> cells(reps * nm);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= reps * nm) return;
      const std::size_t rep = task / nm;
      const std::size_t m = task % nm;
      Scenario sc = scenario;
      sc.seed = scenario.seed + rep;
      ModelConfig cfg = config;
      cfg.seed = config.seed + rep;
      try {
        const auto sim = generate(sc);
        if (m == 0) sims[rep] = sim;
        cells[task].result = methods[m].fit(sim, cfg);
        cells[task].ok = true;
      } catch (const std::exception&) {
        cells[task].ok = false;
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(reps * nm));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (sims[rep].series.values.empty()) {
      Scenario sc = scenario;
      sc.seed = scenario.seed + rep;
      sims[rep] = generate(sc);
    }
  }

  std::vector<BenchmarkRow> rows;
  for (std::size_t m = 0; m < nm; ++m) {
    BenchmarkRow row;
    row.method = methods[m].name;
    row.n_reps = reps;
    double rand_sum = 0.0, cp_sum = 0.0, diff_sum = 0.0, dist_sum = 0.0, tpr_sum = 0.0, fpr_sum = 0.0;
    std::size_t dist_n = 0, out_n = 0, ok = 0;
    std::vector<double> pred_cp_sums;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& cell = cells[rep * nm + m];
      if (!cell.ok) {
        ++row.failures;
        continue;
      }
      ++ok;
      const auto& sim = sims[rep];
      const auto& truth = sim.truth.predictor_changepoints.empty() ? sim.truth.changepoints
                                                                   : sim.truth.predictor_changepoints.front();
      const std::size_t t_len = sim.series.size();
      const auto& pred = cell.result.changepoints;
      rand_sum += rand_index(pred, truth, t_len);
      row.adj_rand.push_back(adjusted_rand(pred, truth, t_len));
      cp_sum += static_cast<double>(pred.size());
      if (pred.empty()) ++row.n_zero_cp;
      const auto cm = cp_metrics(pred, truth);
      diff_sum += static_cast<double>(cm.diff_cp_count);
      if (cm.avg_dist_to_true) {
        dist_sum += *cm.avg_dist_to_true;
        ++dist_n;
      }
      if (cell.result.flagged_outliers && !sim.truth.outliers.empty()) {
        const auto om = outlier_metrics(*cell.result.flagged_outliers, sim.truth.outliers, t_len);
        tpr_sum += om.tpr;
        fpr_sum += om.fpr;
        ++out_n;
      }
      const auto& per = cell.result.per_predictor_cps;
      if (pred_cp_sums.size() < per.size()) pred_cp_sums.resize(per.size(), 0.0);
      for (std::size_t j = 0; j < per.size(); ++j) pred_cp_sums[j] += static_cast<double>(per[j]);
    }
    if (ok > 0) {
      const auto n = static_cast<double>(ok);
      row.rand_avg = rand_sum / n;
      row.adj_rand_avg = mean(row.adj_rand);
      row.avg_no_cp = cp_sum / n;
      row.avg_diff_cp = diff_sum / n;
      if (dist_n > 0) row.avg_dist = dist_sum / static_cast<double>(dist_n);
      if (out_n > 0) {
        row.tpr = tpr_sum / static_cast<double>(out_n);
        row.fpr = fpr_sum / static_cast<double>(out_n);
      }
      double ss = 0.0;
      for (double a : row.adj_rand) ss += (a - row.adj_rand_avg) * (a - row.adj_rand_avg);
      row.se = ok > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
      for (double s : pred_cp_sums) row.avg_cp_per_predictor.push_back(s / n);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace abco
