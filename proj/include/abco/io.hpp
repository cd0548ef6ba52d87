#pragma once

#include <string>
#include <vector>

#include "abco/core.hpp"
#include "abco/detect.hpp"
#include "abco/eval.hpp"
#include "abco/extensions.hpp"
#include "abco/gibbs.hpp"
#include "abco/simgen.hpp"

namespace abco {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header row required; column `y` required, optional leading `t`, optional x1..xp.
TimeSeries parse_series_csv(const std::string& text);
TimeSeries read_series_csv(const std::string& path);
std::string series_to_csv(const TimeSeries& series);

// JSON text encoders / decoders (stable key order).
std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);
/// Applies only the keys present in `text` on top of `base`.
ModelConfig merge_config_json(const ModelConfig& base, const std::string& text);

std::string series_to_json(const TimeSeries& series);
TimeSeries series_from_json(const std::string& text);

std::string truth_to_json(const GroundTruth& truth, const Scenario& scenario);
GroundTruth truth_from_json(const std::string& text);

std::string draws_to_json(const PosteriorDraws& draws);
PosteriorDraws draws_from_json(const std::string& text);

struct ReportExtras {
  std::optional<ItsFit> its;
  std::optional<RegressionReport> regression;
};

std::string report_to_json(const ChangepointReport& report, const ModelConfig& config, const ReportExtras& extras = {});
ChangepointReport report_from_json(const std::string& text);

/// t, y, trend_mean, lo, hi, cp_prob, outlier_score; CRLF line ends.
std::string report_to_csv(const TimeSeries& series, const ChangepointReport& report);

std::string benchmark_to_csv(const std::vector<BenchmarkRow>& rows);
std::string benchmark_to_text(const std::vector<BenchmarkRow>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace abco
