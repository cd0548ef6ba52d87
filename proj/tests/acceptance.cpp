// One pass/fail line per acceptance criterion. Usage: abco_acceptance [criterion ...]
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "abco/cli.hpp"
#include "abco/detect.hpp"
#include "abco/eval.hpp"
#include "abco/extensions.hpp"
#include "abco/io.hpp"
#include "abco/simgen.hpp"
#include "support.hpp"

using namespace abco;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ModelConfig bench_config(ScenarioKind kind) {
  ModelConfig c;
  c.d = natural_order(kind);
  c.iters = 4000;
  c.burn = 1500;
  c.seed = kSeed;
  return c;
}

Scenario scenario(ScenarioKind kind, std::size_t t_len) {
  auto sc = default_scenario(kind, kSeed);
  sc.t_len = t_len;
  return sc;
}

const BenchmarkRow& row(const std::vector<BenchmarkRow>& rows, const std::string& name) {
  return *std::find_if(rows.begin(), rows.end(), [&](const BenchmarkRow& r) { return r.method == name; });
}

// The first four benchmarks reproduce the model without an outlier component.
Outcome linear_one_cp() {
  auto cfg = bench_config(ScenarioKind::LinearOneCp);
  cfg.use_outliers = false;
  const auto rows = run_benchmark(scenario(ScenarioKind::LinearOneCp, 100), 20, {builtin_method("abco")}, cfg, jobs());
  const auto& r = rows.front();
  const bool ok = r.failures == 0 && r.adj_rand_avg >= 0.75 && r.rand_avg >= 0.88 && r.n_zero_cp <= 4;
  return {ok, fmt("ARI %.3f (>= 0.75), Rand %.3f (>= 0.88), zero-CP runs %zu/20 (<= 4)", r.adj_rand_avg, r.rand_avg,
                  r.n_zero_cp)};
}

Outcome multi_cp_sv() {
  auto cfg = bench_config(ScenarioKind::MultiCpSv);
  cfg.use_outliers = false;
  const auto rows = run_benchmark(scenario(ScenarioKind::MultiCpSv, 500), 10,
                                  {builtin_method("abco"), builtin_method("horseshoe")}, cfg, jobs());
  const auto& a = row(rows, "abco");
  const auto& h = row(rows, "horseshoe");
  const bool ok = a.failures == 0 && a.adj_rand_avg >= 0.70 && a.adj_rand_avg > h.adj_rand_avg;
  return {ok, fmt("ABCO ARI %.3f (>= 0.70), horseshoe ARI %.3f (ABCO must exceed)", a.adj_rand_avg, h.adj_rand_avg)};
}

Outcome quadratic() {
  auto cfg = bench_config(ScenarioKind::QuadraticOneCp);
  cfg.use_outliers = false;
  const auto rows =
      run_benchmark(scenario(ScenarioKind::QuadraticOneCp, 200), 10, {builtin_method("abco")}, cfg, jobs());
  const auto& r = rows.front();
  const bool ok = r.failures == 0 && r.adj_rand_avg >= 0.90 && r.n_zero_cp == 0;
  return {ok, fmt("ARI %.3f (>= 0.90), zero-CP runs %zu (== 0)", r.adj_rand_avg, r.n_zero_cp)};
}

Outcome regression() {
  auto cfg = bench_config(ScenarioKind::RegressionThreePred);
  cfg.use_outliers = false;
  const auto rows =
      run_benchmark(scenario(ScenarioKind::RegressionThreePred, 100), 10, {builtin_method("abco")}, cfg, jobs());
  const auto& r = rows.front();
  const double n = static_cast<double>(r.n_reps);
  const double noise_cps = r.avg_cp_per_predictor.size() >= 3
                               ? (r.avg_cp_per_predictor[1] + r.avg_cp_per_predictor[2]) * n
                               : std::numeric_limits<double>::infinity();
  const bool ok = r.failures == 0 && noise_cps <= 1.0 + 1e-9 && r.adj_rand_avg >= 0.90;
  return {ok, fmt("CPs in predictors 2+3: %.0f (<= 1), predictor-1 ARI %.3f (>= 0.90)", noise_cps, r.adj_rand_avg)};
}

Outcome outliers() {
  const auto cfg = bench_config(ScenarioKind::LinearMeetupOutliers);
  auto sc = scenario(ScenarioKind::LinearMeetupOutliers, 100);
  sc.outlier_size = "large";
  const auto rows = run_benchmark(sc, 10, {builtin_method("abco")}, cfg, jobs());
  const auto& r = rows.front();
  const double tpr = r.tpr.value_or(0.0), fpr = r.fpr.value_or(1.0);
  const bool ok = r.failures == 0 && tpr >= 0.7 && fpr <= 0.05 && r.adj_rand_avg >= 0.80;
  return {ok, fmt("outlier TPR %.3f (>= 0.7), FPR %.4f (<= 0.05), ARI %.3f (>= 0.80)", tpr, fpr, r.adj_rand_avg)};
}

Outcome null_data() {
  constexpr int kReps = 20;
  std::vector<std::size_t> counts(kReps);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < std::min(jobs(), kReps); ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < kReps; i = next++) {
        Rng rng(kSeed + static_cast<std::uint64_t>(i), 0x4e55);
        TimeSeries ts;
        for (int t = 0; t < 200; ++t) ts.values.push_back(rng.normal());
        ModelConfig c;
        c.d = 1;
        c.iters = 4000;
        c.burn = 1500;
        c.seed = kSeed + static_cast<std::uint64_t>(i);
        const auto draws = run(ts, c);
        counts[static_cast<std::size_t>(i)] =
            changepoints_from_probs(cp_probability(draws), c.d, c.cp_prob_cutoff, c.min_cp_separation).size();
      }
    });
  for (auto& t : pool) t.join();
  const auto zero = std::count(counts.begin(), counts.end(), std::size_t{0});
  return {zero >= 18, fmt("%td/20 runs declare no changepoint (>= 18)", zero)};
}

Outcome distributions() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(kSeed, 7);
  constexpr int n = 100000;
  auto mc_mean = [&](auto&& draw) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += draw();
    return s / n;
  };
  std::vector<std::string> bad;
  const double pg0 = mc_mean([&] { return sample_polya_gamma(rng, 0.0); });
  const double pg2 = mc_mean([&] { return sample_polya_gamma(rng, 2.0); });
  if (std::fabs(pg0 - 0.25) > 0.01) bad.push_back(fmt("PG(1,0) %.4f", pg0));
  if (std::fabs(pg2 - std::tanh(1.0) / 4.0) > 0.01) bad.push_back(fmt("PG(1,2) %.4f", pg2));

  const auto& tab = mixture_table();
  const double euler = 0.5772156649015329;
  if (std::fabs(tab.mean() + euler + std::numbers::ln2) > 1e-3) bad.push_back(fmt("mixture mean %.5f", tab.mean()));
  if (std::fabs(tab.variance() - std::numbers::pi * std::numbers::pi / 2.0) > 1e-2)
    bad.push_back(fmt("mixture variance %.5f", tab.variance()));

  // truncated normal N(-2, 0.5^2) on (-inf, 0): mean = m - sd * pdf(b) / cdf(b)
  const double b = 4.0;
  const double tn_exact = -2.0 - 0.5 * std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi) / normal_cdf(b);
  const double tn = mc_mean([&] { return sample_trunc_normal(rng, -2.0, 0.5, -INFINITY, 0.0); });
  if (std::fabs(tn - tn_exact) > 0.01) bad.push_back(fmt("truncated normal %.4f vs %.4f", tn, tn_exact));

  double x = 0.5;
  const double beta_mean = mc_mean([&] {
    x = slice_sample(rng, [](double v) { return log_beta_pdf(v, 10.0, 2.0); }, x, 0.0, 1.0);
    return x;
  });
  if (std::fabs(beta_mean - 10.0 / 12.0) > 0.01) bad.push_back(fmt("Beta(10,2) slice mean %.4f", beta_mean));

  const double ig = mc_mean([&] { return sample_inverse_gamma(rng, 3.0, 4.0); });
  if (std::fabs(ig - 2.0) > 0.05) bad.push_back(fmt("inverse gamma %.4f", ig));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > 60) bad.push_back(fmt("runtime %.1fs", secs));
  std::string detail = fmt("PG(1,0) %.4f, PG(1,2) %.4f, mixture %.4f/%.4f, TN %.4f, Beta %.4f, %.1fs", pg0, pg2,
                           tab.mean(), tab.variance(), tn, beta_mean, secs);
  for (const auto& s : bad) detail += "; off: " + s;
  return {bad.empty(), detail};
}

Outcome linalg() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(kSeed);
  std::uniform_int_distribution<std::size_t> dim(1, 50), band(1, 6);
  std::normal_distribution<double> nd;
  double worst_rec = 0, worst_solve = 0, worst_sample = 0;
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = dim(gen), bw = std::min(band(gen), n - 1);
    const auto q = test::random_spd(gen, n, bw);
    const Eigen::MatrixXd qd = test::to_dense(q);
    const BandedCholesky chol(q);
    const Eigen::MatrixXd l = test::factor_dense(chol);
    worst_rec = std::max(worst_rec, (l * l.transpose() - qd).cwiseAbs().maxCoeff() / qd.cwiseAbs().maxCoeff());

    std::vector<double> rhs(n);
    for (auto& v : rhs) v = nd(gen);
    const auto x = chol.solve(rhs);
    const Eigen::VectorXd xr = qd.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n)));
    for (std::size_t i = 0; i < n; ++i)
      worst_solve = std::max(worst_solve, std::fabs(x[i] - xr(static_cast<Eigen::Index>(i))) / (1.0 + xr.cwiseAbs().maxCoeff()));

    // same normal stream through a dense oracle: Q^{-1} l + L^{-T} z
    Rng r1(kSeed + static_cast<std::uint64_t>(it)), r2(kSeed + static_cast<std::uint64_t>(it));
    const auto draw = chol.sample(r1, rhs);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = r2.normal();
    const Eigen::MatrixXd lref = qd.llt().matrixL();
    const Eigen::VectorXd want = xr + lref.transpose().triangularView<Eigen::Upper>().solve(z);
    for (std::size_t i = 0; i < n; ++i)
      worst_sample = std::max(worst_sample, std::fabs(draw[i] - want(static_cast<Eigen::Index>(i))) /
                                                (1.0 + want.cwiseAbs().maxCoeff()));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = worst_rec < 1e-10 && worst_solve < 1e-9 && worst_sample < 1e-9 && secs <= 30;
  return {ok, fmt("max rel. error: LL^T %.1e (< 1e-10), solve %.1e, sample %.1e (< 1e-9); %.2fs", worst_rec,
                  worst_solve, worst_sample, secs)};
}

Outcome sampler_consistency() {
  std::vector<std::string> bad;
  // (a) s / omega / gamma invariant after every sweep
  {
    const auto sim = generate(scenario(ScenarioKind::LinearOneCp, 100));
    ModelConfig c;
    c.iters = 500;
    c.burn = 0;
    GibbsChain chain(sim.series, c);
    std::size_t violations = 0;
    for (int i = 0; i < 500; ++i) {
      chain.sweep();
      const auto& st = chain.state();
      const auto inc = diff(st.beta, c.d);
      for (std::size_t k = 0; k < st.evo.size(); ++k) {
        const bool flag = std::log(st.evo.omega[k] * st.evo.omega[k] + kLogOffset) > st.evo.gamma;
        if (st.evo.s[k] != (flag ? 1 : 0)) ++violations;
        if (std::fabs(st.evo.omega[k] - inc[k]) > 1e-9 * (1.0 + std::fabs(inc[k]))) ++violations;
      }
    }
    if (violations) bad.push_back(fmt("%zu invariant violations", violations));
  }
  // (b) prior recovery: exact prior draws moved by sweeps keep the prior law
  double p_phi1 = 0, p_mu = 0;
  {
    PriorHyper pr;
    Rng rng(kSeed, 0x6e7e);
    std::vector<double> phi1, mu;
    for (int i = 0; i < 10000; ++i) {
      // threshold bracket far above any increment: the plain SV(1) limit
      auto blk = test::simulate_evolution_prior(rng, 50, pr, 0.0, 40.0, 50.0);
      for (int s = 0; s < 10; ++s) sweep_evolution(rng, blk, pr, 150);
      phi1.push_back(blk.phi1);
      mu.push_back(blk.mu);
    }
    p_phi1 = test::ks_pvalue(test::ks_statistic(phi1, test::phi1_cdf), phi1.size());
    p_mu = test::ks_pvalue(test::ks_statistic(mu, test::z_cdf), mu.size());
    if (p_phi1 <= 0.001) bad.push_back(fmt("phi1 KS p %.2g", p_phi1));
    if (p_mu <= 0.001) bad.push_back(fmt("mu KS p %.2g", p_mu));
  }
  // (c) interrupted series with a vanishing intervention variance matches the plain fit
  double its_gap = 0;
  {
    const auto sim = generate(scenario(ScenarioKind::LinearOneCp, 100));
    ModelConfig c;
    c.iters = 6000;
    c.burn = 2000;
    const auto plain = run(sim.series, c);
    const auto its = fit_interrupted(sim.series, c, ItsConfig{50, 1e-12});
    const auto a = summarize_trend(plain), b = summarize_trend(its.draws);
    double noise = 0;
    for (std::size_t t = 0; t < a.mean.size(); ++t) {
      its_gap += std::fabs(a.mean[t] - b.mean[t]);
      noise += (a.hi[t] - a.lo[t]) / 3.92;
    }
    // mean |difference| in units of the mean posterior sd
    its_gap /= noise;
    if (its_gap > 0.1) bad.push_back(fmt("ITS gap %.3f posterior sd", its_gap));
  }
  std::string detail = fmt("invariant exact over 500 sweeps; KS p phi1 %.3g, mu %.3g (> 0.001); ITS gap %.3f sd (<= 0.1)",
                           p_phi1, p_mu, its_gap);
  for (const auto& s : bad) detail += "; off: " + s;
  return {bad.empty(), detail};
}

Outcome metrics() {
  std::mt19937_64 gen(kSeed);
  std::size_t rand_bad = 0, pelt_bad = 0;
  auto random_cps = [&](std::size_t t_len) {
    std::vector<std::size_t> cps;
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.0, 0.5)(gen));
    for (std::size_t t = 1; t < t_len; ++t)
      if (coin(gen)) cps.push_back(t);
    return cps;
  };
  for (int i = 0; i < 1000; ++i) {
    const std::size_t t_len = std::uniform_int_distribution<std::size_t>(1, 30)(gen);
    const auto a = random_cps(t_len), b = random_cps(t_len);
    const auto la = test::labels_of(a, t_len), lb = test::labels_of(b, t_len);
    if (std::fabs(rand_index(a, b, t_len) - test::brute_rand(la, lb)) > 1e-12) ++rand_bad;
    if (std::fabs(adjusted_rand(a, b, t_len) - test::brute_ari(la, lb)) > 1e-12) ++rand_bad;
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t t_len = std::uniform_int_distribution<std::size_t>(4, 40)(gen);
    std::normal_distribution<double> nd;
    std::vector<double> x(t_len);
    double level = 0;
    for (auto& v : x) {
      if (std::bernoulli_distribution(0.1)(gen)) level += 4.0 * nd(gen);
      v = level + nd(gen);
    }
    const double penalty = std::uniform_real_distribution<double>(0.5, 15.0)(gen);
    const std::size_t min_seg = std::uniform_int_distribution<std::size_t>(1, 3)(gen);
    if (t_len < 2 * min_seg) continue;
    if (pelt_baseline(x, penalty, min_seg) != test::exhaustive_partition(x, penalty, min_seg)) ++pelt_bad;
  }
  return {rand_bad == 0 && pelt_bad == 0,
          fmt("Rand/ARI mismatches %zu/2000, PELT vs exhaustive mismatches %zu/200", rand_bad, pelt_bad)};
}

Outcome determinism() {
  test::TempDir dir("det");
  const auto sim = generate(scenario(ScenarioKind::LinearOneCp, 100));
  write_file(dir.file("in.csv"), series_to_csv(sim.series));
  std::ostringstream out, err;
  auto fit = [&](const std::string& stem) {
    return run_cli({"fit", "--input", dir.file("in.csv"), "--seed", "11", "--iters", "1500", "--burn", "500", "--out",
                    dir.file(stem), "--quiet"},
                   out, err);
  };
  const int c1 = fit("a"), c2 = fit("b");
  if (c1 || c2) return {false, fmt("fit exit codes %d, %d: %s", c1, c2, err.str().c_str())};
  const auto a = read_file(dir.file("a.json")), b = read_file(dir.file("b.json"));
  return {a == b, fmt("report JSON %zu bytes, identical: %s", a.size(), a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  using Check = Outcome (*)();
  const std::vector<std::pair<std::string, Check>> checks = {
      {"linear trend, one changepoint", linear_one_cp},
      {"stochastic-volatility scenario", multi_cp_sv},
      {"quadratic trend", quadratic},
      {"regression extension", regression},
      {"outlier robustness", outliers},
      {"null-data false positives", null_data},
      {"distribution properties", distributions},
      {"banded linear algebra oracles", linalg},
      {"sampler consistency", sampler_consistency},
      {"metric oracles", metrics},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", checks[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
