#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "abco/extensions.hpp"
#include "abco/simgen.hpp"
#include "support.hpp"

using namespace abco;
using namespace abco::test;

namespace {

std::vector<double> posterior_mean(const PosteriorDraws& dr) {
  std::vector<double> m(dr.t_len, 0.0);
  for (std::size_t i = 0; i < dr.count; ++i)
    for (std::size_t t = 0; t < dr.t_len; ++t) m[t] += dr.beta[i * dr.t_len + t];
  for (auto& v : m) v /= static_cast<double>(dr.count);
  return m;
}

std::vector<double> posterior_sd(const PosteriorDraws& dr, const std::vector<double>& m) {
  std::vector<double> s(dr.t_len, 0.0);
  for (std::size_t i = 0; i < dr.count; ++i)
    for (std::size_t t = 0; t < dr.t_len; ++t) s[t] += std::pow(dr.beta[i * dr.t_len + t] - m[t], 2);
  for (auto& v : s) v = std::sqrt(v / static_cast<double>(dr.count));
  return s;
}

TimeSeries broken_line(double level_shift, double slope_change, std::size_t pi, std::uint64_t seed) {
  Rng rng(seed);
  TimeSeries ts;
  for (std::size_t t = 0; t < 60; ++t) {
    double v = 10.0 + 0.5 * static_cast<double>(t);
    if (t >= pi) v += level_shift + slope_change * static_cast<double>(t - pi);
    ts.values.push_back(v + 2.0 * rng.normal());
  }
  return ts;
}

}  // namespace

TEST_SUITE("extensions") {
  TEST_CASE("regression precision at p = 1 with a unit design is the univariate precision") {
    Rng rng(1);
    const std::size_t t_len = 30;
    Matrix x(t_len, 1, 1.0);
    std::vector<double> sigma2(t_len), w(t_len - 2);
    for (auto& v : sigma2) v = 0.5 + rng.uniform();
    for (auto& v : w) v = std::exp(rng.normal());
    const auto reg = regression_precision(x, sigma2, {w}, 2);
    auto uni = build_difference_precision(t_len, 2, w);
    for (std::size_t t = 0; t < t_len; ++t) uni.add(t, t, 1.0 / sigma2[t]);
    CHECK((to_dense(reg) - to_dense(uni)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("regression precision matches a dense assembly") {
    Rng rng(2);
    const std::size_t t_len = 9, p = 3;
    const int d = 2;
    Matrix x(t_len, p);
    for (auto& v : x.data) v = rng.normal();
    std::vector<double> sigma2(t_len);
    for (auto& v : sigma2) v = 0.5 + rng.uniform();
    std::vector<std::vector<double>> w(p, std::vector<double>(t_len - d));
    for (auto& wj : w)
      for (auto& v : wj) v = std::exp(rng.normal());
    const auto q = regression_precision(x, sigma2, w, d);

    const auto n = static_cast<Eigen::Index>(t_len * p);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t t = 0; t < t_len; ++t)
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
          dense(static_cast<Eigen::Index>(t * p + a), static_cast<Eigen::Index>(t * p + b)) += x(t, a) * x(t, b) / sigma2[t];
    for (std::size_t j = 0; j < p; ++j) {
      const Eigen::MatrixXd dj = dense_difference_precision(t_len, d, w[j]);
      for (std::size_t s = 0; s < t_len; ++s)
        for (std::size_t u = 0; u < t_len; ++u)
          dense(static_cast<Eigen::Index>(s * p + j), static_cast<Eigen::Index>(u * p + j)) +=
              dj(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(u));
    }
    CHECK((to_dense(q) - dense).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("regression with a unit design reduces to the univariate fit") {
    const auto sim = generate(default_scenario(ScenarioKind::LinearOneCp, 3));
    ModelConfig cfg;
    cfg.iters = 3000;
    cfg.burn = 1000;
    cfg.use_outliers = false;
    const auto uni = run(sim.series, cfg);
    auto with_x = sim.series;
    with_x.design = Matrix(sim.series.size(), 1, 1.0);
    const auto reg = fit_regression(with_x, cfg);
    REQUIRE(reg.coef.size() == 1);
    const auto mu = posterior_mean(uni), mr = posterior_mean(reg.coef[0]);
    const auto su = posterior_sd(uni, mu);
    double gap = 0, scale = 0;
    for (std::size_t t = 0; t < mu.size(); ++t) {
      gap += std::fabs(mu[t] - mr[t]);
      scale += su[t];
    }
    CHECK(gap / scale < 0.25);
  }

  TEST_CASE("per-predictor increments track each coefficient path") {
    const auto sim = generate(default_scenario(ScenarioKind::RegressionThreePred, 4));
    ModelConfig cfg;
    cfg.iters = 300;
    cfg.burn = 100;
    cfg.d = 1;
    const auto reg = fit_regression(sim.series, cfg);
    CHECK(reg.count == 200);
    CHECK(reg.log_tau0_sq.size() == 200);
    for (const auto& c : reg.coef) {
      for (std::size_t i = 0; i < c.count; ++i) {
        const auto om = diff(c.beta_row(i), 1);
        const auto lo = c.log_omega2_row(i);
        for (std::size_t k = 0; k < om.size(); ++k)
          REQUIRE(lo[k] == doctest::Approx(std::log(om[k] * om[k] + kLogOffset)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("a predictor without signal gets no changepoints") {
    const auto sim = generate(default_scenario(ScenarioKind::RegressionThreePred, 5));
    auto ts = sim.series;
    for (std::size_t t = 0; t < ts.size(); ++t) (*ts.design)(t, 2) = 0.0;
    ModelConfig cfg;
    cfg.d = 1;
    cfg.iters = 2000;
    cfg.burn = 1000;
    cfg.use_outliers = false;
    const auto reg = fit_regression(ts, cfg);
    CHECK(reg.rank_warning);
    const auto rep = make_regression_report(reg, cfg);
    CHECK(rep.predictors[2].changepoints.empty());
  }

  TEST_CASE("regression input errors") {
    TimeSeries ts;
    ts.values.assign(20, 1.0);
    ModelConfig cfg;
    CHECK_THROWS_AS(fit_regression(ts, cfg), Error);
  }

  TEST_CASE("a vanishing intervention variance reproduces the plain fit") {
    const auto ts = broken_line(0.0, 0.0, 30, 6);
    ModelConfig cfg;
    cfg.iters = 3000;
    cfg.burn = 1000;
    const auto plain = run(ts, cfg);
    const auto its = fit_interrupted(ts, cfg, ItsConfig{30, 1e-12});
    const auto mp = posterior_mean(plain), mi = posterior_mean(its.draws);
    const auto sp = posterior_sd(plain, mp);
    double gap = 0, scale = 0;
    for (std::size_t t = 0; t < mp.size(); ++t) {
      gap += std::fabs(mp[t] - mi[t]);
      scale += sp[t];
    }
    CHECK(gap / scale < 0.1);
  }

  TEST_CASE("level shift recovery") {
    const auto ts = broken_line(-20.0, 0.0, 30, 7);
    ModelConfig cfg;
    cfg.iters = 3000;
    cfg.burn = 1000;
    const auto fit = fit_interrupted(ts, cfg, ItsConfig{30, std::nullopt});
    CHECK(fit.upsilon_var == doctest::Approx(default_upsilon_var(ts.values)));
    CHECK(fit.level_shift.size() == 2000);
    CHECK(fit.level_summary.mean > -26.0);
    CHECK(fit.level_summary.mean < -14.0);
  }

  TEST_CASE("pure slope change leaves the level shift near zero") {
    const auto ts = broken_line(0.0, 2.0, 30, 8);
    ModelConfig cfg;
    cfg.iters = 3000;
    cfg.burn = 1000;
    const auto fit = fit_interrupted(ts, cfg, ItsConfig{30, std::nullopt});
    CHECK(fit.level_summary.lo95 < 0.5);
    CHECK(fit.level_summary.hi95 > 0.5);
    CHECK(fit.slope_summary.lo95 > 0.0);
  }

  TEST_CASE("intervention terms live only at the intervention") {
    const auto ts = broken_line(-5.0, 0.0, 20, 9);
    ModelConfig cfg;
    GibbsChain plain(ts, cfg);
    CHECK(plain.state().upsilon.empty());
    GibbsChain chain(ts, cfg, InterventionSpec{20, 50.0});
    for (int i = 0; i < 50; ++i) {
      chain.sweep();
      REQUIRE(chain.state().upsilon.size() == 2);
    }
  }

  TEST_CASE("intervention index errors") {
    const auto ts = broken_line(0.0, 0.0, 30, 10);
    ModelConfig cfg;
    for (std::size_t pi : {0u, 2u, 59u, 100u}) {
      try {
        fit_interrupted(ts, cfg, ItsConfig{pi, std::nullopt});
        FAIL("expected BadPi");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadPi);
      }
    }
    cfg.d = 1;
    CHECK_THROWS_AS(fit_interrupted(ts, cfg, ItsConfig{30, std::nullopt}), Error);
  }

  TEST_CASE("sample summary") {
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(i);
    const auto s = summarize_samples(v, 10);
    CHECK(s.mean == 50.0);
    CHECK(s.median == 50.0);
    CHECK(s.lo95 == doctest::Approx(2.5));
    CHECK(s.hi95 == doctest::Approx(97.5));
    CHECK(s.bin_edges.size() == 11);
    std::size_t total = 0;
    for (auto c : s.bin_counts) total += c;
    CHECK(total == 101);
  }
}
