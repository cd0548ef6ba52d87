#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abco/core.hpp"
#include "abco/random.hpp"

namespace abco {

enum class ScenarioKind {
  LinearOneCp,
  LinearTwoCp,
  MultiCpSv,
  LongRandomCp,
  QuadraticOneCp,
  MeanCpSv,
  MeanOutliers,
  LinearMeetupOutliers,
  RegressionThreePred,
};

/// Kebab-case name, e.g. "linear-one-cp".
std::string scenario_name(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario(std::string_view name);
std::vector<ScenarioKind> all_scenarios();

struct Scenario {
  ScenarioKind kind = ScenarioKind::LinearOneCp;
  std::size_t t_len = 100;
  std::uint64_t seed = 1;
  /// Numeric overrides (see README for the keys each kind reads).
  std::map<std::string, double> params;
  /// LinearMeetupOutliers: "small", "large" or "mixed".
  std::string outlier_size = "large";

  double param(const std::string& key, double fallback) const;
};

/// Difference order that matches the trend shape of a kind (1 piecewise constant,
/// 2 piecewise linear, 3 piecewise quadratic).
int natural_order(ScenarioKind kind);

/// Scenario with the default length of its kind (T = 100 unless stated otherwise).
Scenario default_scenario(ScenarioKind kind, std::uint64_t seed = 1);

struct GroundTruth {
  /// First index of each new segment, strictly increasing.
  std::vector<std::size_t> changepoints;
  std::vector<int> segment_labels;
  std::vector<double> true_trend;
  std::vector<std::size_t> outliers;
  /// Regression only: changepoints of each coefficient path.
  std::vector<std::vector<std::size_t>> predictor_changepoints;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Simulation {
  TimeSeries series;
  GroundTruth truth;
};

Simulation generate(const Scenario& scenario, Rng& rng);
/// Uses Rng(scenario.seed).
Simulation generate(const Scenario& scenario);

/// Segment labels 0, 1, ... for a sorted changepoint list.
std::vector<int> labels_from_changepoints(std::span<const std::size_t> cps, std::size_t t_len);

}  // namespace abco
