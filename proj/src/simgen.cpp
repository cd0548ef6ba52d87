#include "abco/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace abco {

namespace {

struct NamedKind {
  ScenarioKind kind;
  const char* name;
  std::size_t default_t;
  int order;
};

constexpr std::array<NamedKind, 9> kKinds{{
    {ScenarioKind::LinearOneCp, "linear-one-cp", 100, 2},
    {ScenarioKind::LinearTwoCp, "linear-two-cp", 100, 2},
    {ScenarioKind::MultiCpSv, "multi-cp-sv", 500, 2},
    {ScenarioKind::LongRandomCp, "long-random-cp", 2000, 2},
    {ScenarioKind::QuadraticOneCp, "quadratic-one-cp", 200, 3},
    {ScenarioKind::MeanCpSv, "mean-cp-sv", 1000, 1},
    {ScenarioKind::MeanOutliers, "mean-outliers", 200, 1},
    {ScenarioKind::LinearMeetupOutliers, "linear-meetup-outliers", 100, 2},
    {ScenarioKind::RegressionThreePred, "regression-three-pred", 100, 1},
}};

double unif(Rng& rng, double a, double b) { return a + (b - a) * rng.uniform(); }

// Integer uniform on [lo, hi).
std::size_t unif_index(Rng& rng, std::size_t lo, std::size_t hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<double>(hi - lo);
  return std::min(hi - 1, lo + static_cast<std::size_t>(rng.uniform() * span));
}

double random_sign(Rng& rng) { return rng.uniform() < 0.5 ? -1.0 : 1.0; }

// k changepoints in [sep, T - sep] with consecutive gaps >= sep, uniform over valid sets.
std::vector<std::size_t> spaced_changepoints(Rng& rng, std::size_t t_len, std::size_t k, std::size_t sep) {
  const std::size_t margin = sep;
  const std::size_t need = 2 * margin + (k - 1) * (sep - 1) + k;
  if (t_len < need) throw Error(ErrorCode::BadParam, "series too short for the requested changepoints");
  const std::size_t room = t_len - 2 * margin - (k - 1) * (sep - 1) + 1;
  std::set<std::size_t> picks;
  while (picks.size() < k) picks.insert(unif_index(rng, 0, room));
  std::vector<std::size_t> cps;
  std::size_t i = 0;
  for (std::size_t p : picks) cps.push_back(margin + p + i++ * (sep - 1));
  return cps;
}

// Non-adjacent distinct positions drawn from [lo, hi).
std::vector<std::size_t> scattered_positions(Rng& rng, std::size_t lo, std::size_t hi, std::size_t count,
                                             const std::set<std::size_t>& taken) {
  std::set<std::size_t> used = taken;
  std::vector<std::size_t> out;
  for (int guard = 0; out.size() < count && guard < 100000; ++guard) {
    const std::size_t p = unif_index(rng, lo, hi);
    if (used.count(p) || (p > 0 && used.count(p - 1)) || used.count(p + 1)) continue;
    used.insert(p);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// log(eps_t^2) follows a stationary AR(1); eps_t takes a random sign.
std::vector<double> sv_noise(Rng& rng, std::size_t t_len, double phi, double sd_alpha) {
  std::vector<double> eps(t_len);
  double l = rng.normal() * sd_alpha / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 0; t < t_len; ++t) {
    if (t > 0) l = phi * l + sd_alpha * rng.normal();
    eps[t] = random_sign(rng) * std::exp(0.5 * l);
  }
  return eps;
}

double student_t(Rng& rng, double dof) {
  const double chi2 = 2.0 * rng.gamma(0.5 * dof);
  return rng.normal() / std::sqrt(chi2 / dof);
}

void piecewise_linear(Rng& rng, const std::vector<std::size_t>& cps, std::size_t t_len, std::vector<double>& trend) {
  trend.assign(t_len, 0.0);
  const double slope_range = 160.0 / static_cast<double>(t_len);
  std::size_t start = 0;
  for (std::size_t seg = 0; seg <= cps.size(); ++seg) {
    const std::size_t end = seg < cps.size() ? cps[seg] : t_len;
    const double level = unif(rng, -20.0, 20.0);
    const double slope = unif(rng, -slope_range, slope_range);
    for (std::size_t t = start; t < end; ++t) trend[t] = level + slope * static_cast<double>(t - start);
    start = end;
  }
}

Simulation finish(std::vector<double> trend, std::vector<double> noise, std::vector<std::size_t> cps,
                  std::vector<std::size_t> outliers = {}, std::vector<double> spikes = {}) {
  Simulation sim;
  const std::size_t t_len = trend.size();
  sim.series.values.resize(t_len);
  for (std::size_t t = 0; t < t_len; ++t) sim.series.values[t] = trend[t] + noise[t];
  for (std::size_t i = 0; i < outliers.size(); ++i) sim.series.values[outliers[i]] += spikes[i];
  sim.truth.segment_labels = labels_from_changepoints(cps, t_len);
  sim.truth.changepoints = std::move(cps);
  sim.truth.true_trend = std::move(trend);
  sim.truth.outliers = std::move(outliers);
  return sim;
}

std::vector<double> gaussian_noise(Rng& rng, std::size_t t_len, double sd) {
  std::vector<double> e(t_len);
  for (auto& v : e) v = sd * rng.normal();
  return e;
}

Simulation linear_one_cp(const Scenario& sc, Rng& rng) {
  const std::size_t t_len = sc.t_len;
  const std::size_t cp = unif_index(rng, t_len / 4, 3 * t_len / 4);
  std::vector<double> trend;
  piecewise_linear(rng, {cp}, t_len, trend);
  const double sd = unif(rng, sc.param("noise_sd_lo", 0.5), sc.param("noise_sd_hi", 3.0));
  return finish(std::move(trend), gaussian_noise(rng, t_len, sd), {cp});
}

Simulation linear_two_cp(const Scenario& sc, Rng& rng) {
  const auto t = static_cast<double>(sc.t_len);
  const std::size_t cp1 = unif_index(rng, static_cast<std::size_t>(0.2 * t), static_cast<std::size_t>(0.4 * t));
  const std::size_t cp2 = unif_index(rng, static_cast<std::size_t>(0.6 * t), static_cast<std::size_t>(0.8 * t));
  std::vector<double> trend;
  piecewise_linear(rng, {cp1, cp2}, sc.t_len, trend);
  const double sd = unif(rng, sc.param("noise_sd_lo", 0.5), sc.param("noise_sd_hi", 3.0));
  return finish(std::move(trend), gaussian_noise(rng, sc.t_len, sd), {cp1, cp2});
}

Simulation multi_cp_sv(const Scenario& sc, Rng& rng) {
  const auto k = static_cast<std::size_t>(unif_index(rng, 2, 5));
  auto cps = spaced_changepoints(rng, sc.t_len, k, static_cast<std::size_t>(sc.param("min_sep", 30)));
  std::vector<double> trend;
  piecewise_linear(rng, cps, sc.t_len, trend);
  auto eps = sv_noise(rng, sc.t_len, sc.param("noise_phi", 0.9), sc.param("noise_sd_alpha", 0.2));
  return finish(std::move(trend), std::move(eps), std::move(cps));
}

Simulation long_random_cp(const Scenario& sc, Rng& rng) {
  const auto k = static_cast<std::size_t>(unif_index(rng, 5, 16));
  auto cps = spaced_changepoints(rng, sc.t_len, k, static_cast<std::size_t>(sc.param("min_sep", 10)));
  std::vector<double> trend;
  piecewise_linear(rng, cps, sc.t_len, trend);
  const double sd = unif(rng, sc.param("noise_sd_lo", 0.5), sc.param("noise_sd_hi", 3.0));
  return finish(std::move(trend), gaussian_noise(rng, sc.t_len, sd), std::move(cps));
}

Simulation quadratic_one_cp(const Scenario& sc, Rng& rng) {
  const std::size_t t_len = sc.t_len;
  const std::size_t cp = unif_index(rng, t_len / 4, 3 * t_len / 4);
  const double min_jump = sc.param("min_jump", 5.0);
  auto coef = [&] { return static_cast<double>(static_cast<long>(unif_index(rng, 0, 41)) - 20); };
  auto quad = [&](const std::array<double, 3>& c, std::size_t t) {
    const double x = static_cast<double>(t) / static_cast<double>(t_len);
    return c[0] * x * x + c[1] * x + c[2];
  };
  std::array<double, 3> first{}, second{};
  do {
    first = {coef(), coef(), coef()};
    second = {coef(), coef(), coef()};
  } while (std::fabs(quad(second, cp) - quad(first, cp)) < min_jump);
  std::vector<double> trend(t_len);
  for (std::size_t t = 0; t < t_len; ++t) trend[t] = quad(t < cp ? first : second, t);
  return finish(std::move(trend), gaussian_noise(rng, t_len, sc.param("noise_sd", 1.0)), {cp});
}

Simulation mean_cp_sv(const Scenario& sc, Rng& rng) {
  const auto k = static_cast<std::size_t>(unif_index(rng, 2, 5));
  auto cps = spaced_changepoints(rng, sc.t_len, k, static_cast<std::size_t>(sc.param("min_sep", 30)));
  std::vector<double> trend(sc.t_len);
  std::size_t start = 0;
  for (std::size_t seg = 0; seg <= cps.size(); ++seg) {
    const std::size_t end = seg < cps.size() ? cps[seg] : sc.t_len;
    const double level = unif(rng, -100.0, 100.0);
    std::fill(trend.begin() + static_cast<std::ptrdiff_t>(start), trend.begin() + static_cast<std::ptrdiff_t>(end),
              level);
    start = end;
  }
  auto eps = sv_noise(rng, sc.t_len, sc.param("noise_phi", 0.9), sc.param("noise_sd_alpha", 0.6));
  return finish(std::move(trend), std::move(eps), std::move(cps));
}

Simulation mean_outliers(const Scenario& sc, Rng& rng) {
  const std::size_t t_len = sc.t_len;
  const auto t = static_cast<double>(t_len);
  const double shift = std::round(unif(rng, -t / 20.0, t / 20.0));
  const auto cp = static_cast<std::size_t>(std::clamp(std::floor(3.0 * t / 4.0) + shift, 1.0, t - 1.0));
  const double m1 = unif(rng, 0.0, 5.0);
  const double m2 = unif(rng, 10.0, 15.0);
  std::vector<double> trend(t_len);
  for (std::size_t i = 0; i < t_len; ++i) trend[i] = i < cp ? m1 : m2;
  std::vector<double> eps(t_len);
  for (auto& v : eps) v = student_t(rng, 5.0);
  const auto count = unif_index(rng, static_cast<std::size_t>(sc.param("outliers_min", 3)),
                                static_cast<std::size_t>(sc.param("outliers_max", 8)) + 1);
  auto pos = scattered_positions(rng, 0, t_len, count, {});
  std::vector<double> spikes;
  for (std::size_t i = 0; i < pos.size(); ++i)
    spikes.push_back(random_sign(rng) * unif(rng, sc.param("outlier_lo", 10.0), sc.param("outlier_hi", 30.0)));
  return finish(std::move(trend), std::move(eps), {cp}, std::move(pos), std::move(spikes));
}

Simulation linear_meetup_outliers(const Scenario& sc, Rng& rng) {
  const std::size_t t_len = sc.t_len;
  const auto t = static_cast<double>(t_len);
  const std::size_t cp = unif_index(rng, static_cast<std::size_t>(0.4 * t), static_cast<std::size_t>(0.6 * t));
  const double min_gap = sc.param("min_slope_gap", 1.5);
  double start, mid, end, s1, s2;
  do {
    start = unif(rng, -100.0, 100.0);
    mid = unif(rng, -100.0, 100.0);
    end = unif(rng, -100.0, 100.0);
    s1 = (mid - start) / static_cast<double>(cp);
    s2 = (end - mid) / static_cast<double>(t_len - 1 - cp);
  } while (std::fabs(s1 - s2) < min_gap);
  std::vector<double> trend(t_len);
  for (std::size_t i = 0; i < t_len; ++i)
    trend[i] = i < cp ? start + s1 * static_cast<double>(i) : mid + s2 * static_cast<double>(i - cp);

  const double sd = sc.param("noise_sd", 1.0);
  double lo = 25.0, hi = 30.0;
  if (sc.outlier_size == "small") {
    lo = 5.0;
    hi = 10.0;
  } else if (sc.outlier_size == "mixed") {
    lo = 5.0;
    hi = 30.0;
  } else if (sc.outlier_size != "large") {
    throw Error(ErrorCode::BadParam, "outlier_size must be small, large or mixed");
  }
  std::vector<std::size_t> pos;
  std::set<std::size_t> taken;
  for (const auto& [a, b] : {std::pair{std::size_t{0}, cp}, std::pair{cp, t_len}}) {
    const auto count = unif_index(rng, 5, 11);
    for (std::size_t p : scattered_positions(rng, a, b, count, taken)) {
      pos.push_back(p);
      taken.insert(p);
    }
  }
  std::sort(pos.begin(), pos.end());
  std::vector<double> spikes;
  for (std::size_t i = 0; i < pos.size(); ++i) spikes.push_back(random_sign(rng) * sd * unif(rng, lo, hi));
  return finish(std::move(trend), gaussian_noise(rng, t_len, sd), {cp}, std::move(pos), std::move(spikes));
}

Simulation regression_three_pred(const Scenario& sc, Rng& rng) {
  const std::size_t t_len = sc.t_len;
  const std::size_t min_len = static_cast<std::size_t>(sc.param("min_jump_len", 10));
  std::size_t c1, c2;
  do {
    c1 = unif_index(rng, t_len / 4, 3 * t_len / 4);
    c2 = unif_index(rng, t_len / 4, 3 * t_len / 4);
    if (c1 > c2) std::swap(c1, c2);
  } while (c2 - c1 < min_len);
  const double base = rng.normal();
  const double jump = random_sign(rng) * unif(rng, sc.param("jump_lo", 4.0), sc.param("jump_hi", 8.0));
  const double b2 = rng.normal();
  const double b3 = rng.normal();

  Matrix x(t_len, 3);
  std::vector<double> signal(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    x(t, 0) = 1.0;
    x(t, 1) = rng.normal();
    x(t, 2) = rng.normal();
    const double b1 = (t >= c1 && t < c2) ? base + jump : base;
    signal[t] = b1 + b2 * x(t, 1) + b3 * x(t, 2);
  }
  auto sim = finish(std::move(signal), gaussian_noise(rng, t_len, sc.param("noise_sd", 1.0)), {c1, c2});
  sim.series.design = std::move(x);
  sim.truth.predictor_changepoints = {{c1, c2}, {}, {}};
  return sim;
}

}  // namespace

std::string scenario_name(ScenarioKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

std::optional<ScenarioKind> parse_scenario(std::string_view name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  return std::nullopt;
}

std::vector<ScenarioKind> all_scenarios() {
  std::vector<ScenarioKind> out;
  for (const auto& k : kKinds) out.push_back(k.kind);
  return out;
}

double Scenario::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int natural_order(ScenarioKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.order;
  return 2;
}

Scenario default_scenario(ScenarioKind kind, std::uint64_t seed) {
  Scenario sc;
  sc.kind = kind;
  sc.seed = seed;
  for (const auto& k : kKinds)
    if (k.kind == kind) sc.t_len = k.default_t;
  return sc;
}

std::vector<int> labels_from_changepoints(std::span<const std::size_t> cps, std::size_t t_len) {
  std::vector<int> labels(t_len, 0);
  std::size_t next = 0;
  int label = 0;
  for (std::size_t t = 0; t < t_len; ++t) {
    while (next < cps.size() && cps[next] <= t) {
      ++label;
      ++next;
    }
    labels[t] = label;
  }
  return labels;
}

Simulation generate(const Scenario& sc, Rng& rng) {
  if (sc.t_len < 8) throw Error(ErrorCode::BadParam, "scenario length must be at least 8");
  switch (sc.kind) {
    case ScenarioKind::LinearOneCp: return linear_one_cp(sc, rng);
    case ScenarioKind::LinearTwoCp: return linear_two_cp(sc, rng);
    case ScenarioKind::MultiCpSv: return multi_cp_sv(sc, rng);
    case ScenarioKind::LongRandomCp: return long_random_cp(sc, rng);
    case ScenarioKind::QuadraticOneCp: return quadratic_one_cp(sc, rng);
    case ScenarioKind::MeanCpSv: return mean_cp_sv(sc, rng);
    case ScenarioKind::MeanOutliers: return mean_outliers(sc, rng);
    case ScenarioKind::LinearMeetupOutliers: return linear_meetup_outliers(sc, rng);
    case ScenarioKind::RegressionThreePred: return regression_three_pred(sc, rng);
  }
  throw Error(ErrorCode::BadParam, "unknown scenario kind");
}

Simulation generate(const Scenario& scenario) {
  Rng rng(scenario.seed, 0x5151);
  return generate(scenario, rng);
}

}  // namespace abco
