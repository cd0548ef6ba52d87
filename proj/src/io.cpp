#include "abco/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace abco {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

namespace {

std::vector<std::vector<std::string>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::Io, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line, const std::string& column) {
  std::string s = trim(raw);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "NaN" || s == "nan" || s == "NA" || s == "Inf" || s == "-Inf" || s == "inf" || s == "-inf")
      throw Error(ErrorCode::NonFinite, "non-finite value in column " + column + " at line " + std::to_string(line));
    throw Error(ErrorCode::Io, "cannot parse '" + s + "' in column " + column + " at line " + std::to_string(line));
  }
  if (!std::isfinite(v))
    throw Error(ErrorCode::NonFinite, "non-finite value in column " + column + " at line " + std::to_string(line));
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double to_double(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json number_array(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> double_vector(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(to_double(x));
  return out;
}

json priors_json(const PriorHyper& p) {
  return json{{"z_alpha", p.z_alpha},
              {"z_beta", p.z_beta},
              {"phi1_beta_a", p.phi1_beta_a},
              {"phi1_beta_b", p.phi1_beta_b},
              {"phi2_mean", p.phi2_mean},
              {"phi2_sd", p.phi2_sd},
              {"tau_scale_factor", p.tau_scale_factor},
              {"outlier_global_scale", p.outlier_global_scale},
              {"outlier_local_scale", p.outlier_local_scale},
              {"sv_mu_prior_sd", p.sv_mu_prior_sd},
              {"sv_phi_beta_a", p.sv_phi_beta_a},
              {"sv_phi_beta_b", p.sv_phi_beta_b},
              {"sv_sigma_ig_shape", p.sv_sigma_ig_shape},
              {"sv_sigma_ig_scale", p.sv_sigma_ig_scale},
              {"noise_ig_shape", p.noise_ig_shape},
              {"noise_ig_scale", p.noise_ig_scale}};
}

json config_json(const ModelConfig& c) {
  return json{{"d", c.d},
              {"iters", c.iters},
              {"burn", c.burn},
              {"thin", c.thin},
              {"seed", c.seed},
              {"use_sv_noise", c.use_sv_noise},
              {"use_outliers", c.use_outliers},
              {"horseshoe", c.horseshoe},
              {"cp_prob_cutoff", c.cp_prob_cutoff},
              {"outlier_cutoff", c.outlier_cutoff},
              {"min_cp_separation", c.min_cp_separation},
              {"grid_size", c.grid_size},
              {"priors", priors_json(c.priors)}};
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->template get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad value for '") + key + "': " + e.what());
  }
}

void apply_priors(const json& j, PriorHyper& p) {
  static const char* known[] = {"z_alpha",       "z_beta",         "phi1_beta_a",          "phi1_beta_b",
                                "phi2_mean",     "phi2_sd",        "tau_scale_factor",     "outlier_global_scale",
                                "outlier_local_scale", "sv_mu_prior_sd", "sv_phi_beta_a",  "sv_phi_beta_b",
                                "sv_sigma_ig_shape", "sv_sigma_ig_scale", "noise_ig_shape", "noise_ig_scale"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw Error(ErrorCode::Io, "unknown prior key '" + key + "'");
  }
  take(j, "z_alpha", p.z_alpha);
  take(j, "z_beta", p.z_beta);
  take(j, "phi1_beta_a", p.phi1_beta_a);
  take(j, "phi1_beta_b", p.phi1_beta_b);
  take(j, "phi2_mean", p.phi2_mean);
  take(j, "phi2_sd", p.phi2_sd);
  take(j, "tau_scale_factor", p.tau_scale_factor);
  take(j, "outlier_global_scale", p.outlier_global_scale);
  take(j, "outlier_local_scale", p.outlier_local_scale);
  take(j, "sv_mu_prior_sd", p.sv_mu_prior_sd);
  take(j, "sv_phi_beta_a", p.sv_phi_beta_a);
  take(j, "sv_phi_beta_b", p.sv_phi_beta_b);
  take(j, "sv_sigma_ig_shape", p.sv_sigma_ig_shape);
  take(j, "sv_sigma_ig_scale", p.sv_sigma_ig_scale);
  take(j, "noise_ig_shape", p.noise_ig_shape);
  take(j, "noise_ig_scale", p.noise_ig_scale);
}

void apply_config(const json& j, ModelConfig& c) {
  if (!j.is_object()) throw Error(ErrorCode::Io, "config must be a JSON object");
  static const char* known[] = {"d",  "iters", "burn", "thin", "seed", "use_sv_noise", "use_outliers", "horseshoe",
                                "cp_prob_cutoff", "outlier_cutoff", "min_cp_separation", "grid_size", "priors",
                                "schema_version"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw Error(ErrorCode::Io, "unknown config key '" + key + "'");
  }
  take(j, "d", c.d);
  take(j, "iters", c.iters);
  take(j, "burn", c.burn);
  take(j, "thin", c.thin);
  take(j, "seed", c.seed);
  take(j, "use_sv_noise", c.use_sv_noise);
  take(j, "use_outliers", c.use_outliers);
  take(j, "horseshoe", c.horseshoe);
  take(j, "cp_prob_cutoff", c.cp_prob_cutoff);
  take(j, "outlier_cutoff", c.outlier_cutoff);
  take(j, "min_cp_separation", c.min_cp_separation);
  take(j, "grid_size", c.grid_size);
  if (auto it = j.find("priors"); it != j.end()) apply_priors(*it, c.priors);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, std::string("invalid JSON: ") + e.what());
  }
}

json summary_json(const SampleSummary& s) {
  json edges = number_array(s.bin_edges);
  return json{{"mean", number(s.mean)},   {"sd", number(s.sd)},     {"lo95", number(s.lo95)},
              {"median", number(s.median)}, {"hi95", number(s.hi95)}, {"bin_edges", edges},
              {"bin_counts", s.bin_counts}};
}

json report_json(const ChangepointReport& r) {
  json j;
  j["method"] = r.method;
  j["d"] = r.d;
  j["t_len"] = r.t_len;
  j["draws"] = r.draws;
  j["changepoints"] = r.changepoints;
  j["cp_prob"] = number_array(r.cp_prob);
  j["outlier_scores"] = number_array(r.outlier_scores);
  j["flagged_outliers"] = r.flagged_outliers;
  j["trend_mean"] = number_array(r.trend_mean);
  j["trend_lo95"] = number_array(r.trend_lo95);
  j["trend_hi95"] = number_array(r.trend_hi95);
  j["obs_lo95"] = number_array(r.obs_lo95);
  j["obs_hi95"] = number_array(r.obs_hi95);
  j["dic"] = number(r.dic);
  j["gamma_mean"] = number(r.gamma_mean);
  j["phi1_mean"] = number(r.phi1_mean);
  j["phi2_mean"] = number(r.phi2_mean);
  j["tau2_mean"] = number(r.tau2_mean);
  j["labels"] = r.labels;
  return j;
}

ChangepointReport report_from(const json& j) {
  ChangepointReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.d = j.at("d").get<int>();
    r.t_len = j.at("t_len").get<std::size_t>();
    r.draws = j.value("draws", std::size_t{0});
    r.changepoints = j.at("changepoints").get<std::vector<std::size_t>>();
    r.cp_prob = double_vector(j.value("cp_prob", json::array()));
    r.outlier_scores = double_vector(j.value("outlier_scores", json::array()));
    r.flagged_outliers = j.value("flagged_outliers", std::vector<std::size_t>{});
    r.trend_mean = double_vector(j.value("trend_mean", json::array()));
    r.trend_lo95 = double_vector(j.value("trend_lo95", json::array()));
    r.trend_hi95 = double_vector(j.value("trend_hi95", json::array()));
    r.obs_lo95 = double_vector(j.value("obs_lo95", json::array()));
    r.obs_hi95 = double_vector(j.value("obs_hi95", json::array()));
    r.dic = to_double(j.value("dic", json(nullptr)));
    r.gamma_mean = to_double(j.value("gamma_mean", json(nullptr)));
    r.phi1_mean = to_double(j.value("phi1_mean", json(nullptr)));
    r.phi2_mean = to_double(j.value("phi2_mean", json(nullptr)));
    r.tau2_mean = to_double(j.value("tau2_mean", json(nullptr)));
    r.labels = j.value("labels", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed report: ") + e.what());
  }
  return r;
}

}  // namespace

TimeSeries parse_series_csv(const std::string& text) {
  auto rows = parse_csv_rows(text);
  if (rows.empty()) throw Error(ErrorCode::Io, "empty CSV");
  std::vector<std::string> header;
  for (const auto& h : rows[0]) header.push_back(trim(h));
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0] = header[0].substr(3);

  std::optional<std::size_t> y_col;
  std::optional<std::size_t> t_col;
  std::vector<std::pair<int, std::size_t>> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (name == "y") {
      y_col = c;
    } else if (name == "t" && c == 0) {
      t_col = c;
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      x_cols.emplace_back(std::stoi(name.substr(1)), c);
    }
  }
  if (!y_col) throw Error(ErrorCode::Io, "CSV has no 'y' column");
  std::sort(x_cols.begin(), x_cols.end());
  for (std::size_t j = 0; j < x_cols.size(); ++j) {
    if (x_cols[j].first != static_cast<int>(j + 1))
      throw Error(ErrorCode::Io, "predictor columns must be x1..xp without gaps");
  }

  TimeSeries ts;
  std::size_t n = rows.size() - 1;
  ts.values.reserve(n);
  if (!x_cols.empty()) ts.design = Matrix(n, x_cols.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(ErrorCode::Io, "line " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                     " fields, expected " + std::to_string(header.size()));
    ts.values.push_back(parse_number(row[*y_col], r + 1, "y"));
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      (*ts.design)(r - 1, j) = parse_number(row[x_cols[j].second], r + 1, header[x_cols[j].second]);
    if (t_col) ts.labels.push_back(trim(row[*t_col]));
  }
  return ts;
}

TimeSeries read_series_csv(const std::string& path) { return parse_series_csv(read_file(path)); }

std::string series_to_csv(const TimeSeries& series) {
  std::string out = "t,y";
  std::size_t p = series.predictors();
  for (std::size_t j = 0; j < p; ++j) out += ",x" + std::to_string(j + 1);
  out += "\r\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += t < series.labels.size() ? csv_field(series.labels[t]) : std::to_string(t);
    out += ',' + format_double(series.values[t]);
    for (std::size_t j = 0; j < p; ++j) out += ',' + format_double((*series.design)(t, j));
    out += "\r\n";
  }
  return out;
}

std::string config_to_json(const ModelConfig& config) {
  json j{{"schema_version", kSchemaVersion}};
  j.update(config_json(config));
  return j.dump(2) + "\n";
}

ModelConfig config_from_json(const std::string& text) { return merge_config_json(ModelConfig{}, text); }

ModelConfig merge_config_json(const ModelConfig& base, const std::string& text) {
  ModelConfig c = base;
  apply_config(parse_json(text), c);
  return c;
}

std::string series_to_json(const TimeSeries& series) {
  json j{{"schema_version", kSchemaVersion}, {"values", number_array(series.values)}};
  if (series.design) {
    j["design"] = json{{"rows", series.design->rows}, {"cols", series.design->cols},
                       {"data", number_array(series.design->data)}};
  }
  j["labels"] = series.labels;
  return j.dump(2) + "\n";
}

TimeSeries series_from_json(const std::string& text) {
  json j = parse_json(text);
  TimeSeries ts;
  try {
    ts.values = double_vector(j.at("values"));
    if (auto it = j.find("design"); it != j.end() && !it->is_null()) {
      Matrix m;
      m.rows = it->at("rows").get<std::size_t>();
      m.cols = it->at("cols").get<std::size_t>();
      m.data = double_vector(it->at("data"));
      if (m.data.size() != m.rows * m.cols) throw Error(ErrorCode::Io, "design size mismatch");
      ts.design = std::move(m);
    }
    ts.labels = j.value("labels", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed series: ") + e.what());
  }
  return ts;
}

std::string truth_to_json(const GroundTruth& truth, const Scenario& scenario) {
  json params = json::object();
  for (const auto& [k, v] : scenario.params) params[k] = v;
  json j{{"schema_version", kSchemaVersion},
         {"scenario", scenario_name(scenario.kind)},
         {"t_len", scenario.t_len},
         {"seed", scenario.seed},
         {"params", params},
         {"outlier_size", scenario.outlier_size},
         {"changepoints", truth.changepoints},
         {"segment_labels", truth.segment_labels},
         {"true_trend", number_array(truth.true_trend)},
         {"outliers", truth.outliers},
         {"predictor_changepoints", truth.predictor_changepoints}};
  return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
  json j = parse_json(text);
  GroundTruth g;
  try {
    g.changepoints = j.at("changepoints").get<std::vector<std::size_t>>();
    g.segment_labels = j.value("segment_labels", std::vector<int>{});
    g.true_trend = double_vector(j.value("true_trend", json::array()));
    g.outliers = j.value("outliers", std::vector<std::size_t>{});
    g.predictor_changepoints = j.value("predictor_changepoints", std::vector<std::vector<std::size_t>>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed truth: ") + e.what());
  }
  return g;
}

std::string draws_to_json(const PosteriorDraws& d) {
  json j{{"schema_version", kSchemaVersion},
         {"count", d.count},
         {"t_len", d.t_len},
         {"d", d.d},
         {"method", d.method},
         {"outliers_enabled", d.outliers_enabled},
         {"sv_noise", d.sv_noise},
         {"beta", number_array(d.beta)},
         {"zeta", number_array(d.zeta)},
         {"zeta_var", number_array(d.zeta_var)},
         {"sigma_eps2", number_array(d.sigma_eps2)},
         {"log_omega2", number_array(d.log_omega2)},
         {"h", number_array(d.h)},
         {"gamma", number_array(d.gamma)},
         {"mu", number_array(d.mu)},
         {"phi1", number_array(d.phi1)},
         {"phi2", number_array(d.phi2)},
         {"tau2", number_array(d.tau2)},
         {"noise_mu", number_array(d.noise_mu)},
         {"noise_phi", number_array(d.noise_phi)},
         {"noise_sigma2", number_array(d.noise_sigma2)},
         {"deviance", number_array(d.deviance)},
         {"deviance_at_mean", number(d.deviance_at_mean)}};
  return j.dump() + "\n";
}

PosteriorDraws draws_from_json(const std::string& text) {
  json j = parse_json(text);
  PosteriorDraws d;
  try {
    d.count = j.at("count").get<std::size_t>();
    d.t_len = j.at("t_len").get<std::size_t>();
    d.d = j.at("d").get<int>();
    d.method = j.at("method").get<std::string>();
    d.outliers_enabled = j.at("outliers_enabled").get<bool>();
    d.sv_noise = j.at("sv_noise").get<bool>();
    d.beta = double_vector(j.at("beta"));
    d.zeta = double_vector(j.at("zeta"));
    d.zeta_var = double_vector(j.at("zeta_var"));
    d.sigma_eps2 = double_vector(j.at("sigma_eps2"));
    d.log_omega2 = double_vector(j.at("log_omega2"));
    d.h = double_vector(j.at("h"));
    d.gamma = double_vector(j.at("gamma"));
    d.mu = double_vector(j.at("mu"));
    d.phi1 = double_vector(j.at("phi1"));
    d.phi2 = double_vector(j.at("phi2"));
    d.tau2 = double_vector(j.at("tau2"));
    d.noise_mu = double_vector(j.at("noise_mu"));
    d.noise_phi = double_vector(j.at("noise_phi"));
    d.noise_sigma2 = double_vector(j.at("noise_sigma2"));
    d.deviance = double_vector(j.at("deviance"));
    d.deviance_at_mean = to_double(j.at("deviance_at_mean"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed draws: ") + e.what());
  }
  return d;
}

std::string report_to_json(const ChangepointReport& report, const ModelConfig& config, const ReportExtras& extras) {
  json j{{"schema_version", kSchemaVersion}};
  j.update(report_json(report));
  j["config"] = config_json(config);
  if (extras.its) {
    const auto& f = *extras.its;
    j["intervention"] = json{{"pi", f.pi},
                             {"upsilon_var", number(f.upsilon_var)},
                             {"level_shift", summary_json(f.level_summary)},
                             {"slope_change", summary_json(f.slope_summary)}};
  }
  if (extras.regression) {
    json preds = json::array();
    for (const auto& p : extras.regression->predictors) preds.push_back(report_json(p));
    j["regression"] = json{{"dic", number(extras.regression->dic)},
                           {"rank_warning", extras.regression->rank_warning},
                           {"predictors", preds}};
  }
  return j.dump(2) + "\n";
}

ChangepointReport report_from_json(const std::string& text) {
  json j = parse_json(text);
  if (auto v = j.find("schema_version"); v != j.end() && *v != kSchemaVersion)
    throw Error(ErrorCode::Io, "unsupported schema_version " + v->dump());
  return report_from(j);
}

std::string report_to_csv(const TimeSeries& series, const ChangepointReport& report) {
  std::string out = "t,y,trend_mean,lo,hi,cp_prob,outlier_score\r\n";
  auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? format_double(v[i]) : ""; };
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += t < series.labels.size() ? csv_field(series.labels[t]) : std::to_string(t);
    out += ',' + format_double(series.values[t]);
    out += ',' + at(report.trend_mean, t);
    out += ',' + at(report.trend_lo95, t);
    out += ',' + at(report.trend_hi95, t);
    std::size_t d = static_cast<std::size_t>(report.d);
    out += ',' + (t >= d ? at(report.cp_prob, t - d) : std::string());
    out += ',' + at(report.outlier_scores, t);
    out += "\r\n";
  }
  return out;
}

namespace {

struct TableColumn {
  std::string name;
  std::function<std::string(const BenchmarkRow&)> cell;
};

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::vector<TableColumn> table_columns(const std::vector<BenchmarkRow>& rows) {
  bool outliers = false;
  std::size_t preds = 0;
  for (const auto& r : rows) {
    outliers = outliers || r.tpr.has_value();
    preds = std::max(preds, r.avg_cp_per_predictor.size());
  }
  std::vector<TableColumn> cols{
      {"Method", [](const BenchmarkRow& r) { return r.method; }},
      {"Rand Avg.", [](const BenchmarkRow& r) { return fixed(r.rand_avg); }},
      {"Adj. Rand Avg.", [](const BenchmarkRow& r) { return fixed(r.adj_rand_avg); }},
      {"Avg. No. CP", [](const BenchmarkRow& r) { return fixed(r.avg_no_cp, 2); }},
      {"No. Zero CP", [](const BenchmarkRow& r) { return std::to_string(r.n_zero_cp); }},
      {"Avg. Dist. to True", [](const BenchmarkRow& r) { return r.avg_dist ? fixed(*r.avg_dist, 2) : "NA"; }},
      {"Avg. Diff. No. CP", [](const BenchmarkRow& r) { return fixed(r.avg_diff_cp, 2); }},
      {"SE", [](const BenchmarkRow& r) { return fixed(r.se); }},
  };
  if (outliers) {
    cols.push_back({"TPR", [](const BenchmarkRow& r) { return r.tpr ? fixed(*r.tpr) : "NA"; }});
    cols.push_back({"FPR", [](const BenchmarkRow& r) { return r.fpr ? fixed(*r.fpr) : "NA"; }});
  }
  for (std::size_t j = 0; j < preds; ++j) {
    cols.push_back({"Avg. No. CP Pred" + std::to_string(j + 1), [j](const BenchmarkRow& r) {
                      return j < r.avg_cp_per_predictor.size() ? fixed(r.avg_cp_per_predictor[j], 2) : "NA";
                    }});
  }
  cols.push_back({"Reps", [](const BenchmarkRow& r) { return std::to_string(r.n_reps); }});
  cols.push_back({"Failures", [](const BenchmarkRow& r) { return std::to_string(r.failures); }});
  return cols;
}

}  // namespace

std::string benchmark_to_csv(const std::vector<BenchmarkRow>& rows) {
  auto cols = table_columns(rows);
  std::string out;
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + csv_field(cols[c].name);
  out += "\r\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + csv_field(cols[c].cell(r));
    out += "\r\n";
  }
  return out;
}

std::string benchmark_to_text(const std::vector<BenchmarkRow>& rows) {
  auto cols = table_columns(rows);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) width[c] = cols[c].name.size();
  for (const auto& r : rows) {
    auto& line = cells.emplace_back();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      line.push_back(cols[c].cell(r));
      width[c] = std::max(width[c], line.back().size());
    }
  }
  std::ostringstream ss;
  auto emit = [&](auto&& get) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string s = get(c);
      if (c) ss << "  ";
      if (c == 0)
        ss << std::left << std::setw(static_cast<int>(width[c])) << s;
      else
        ss << std::right << std::setw(static_cast<int>(width[c])) << s;
    }
    ss << '\n';
  };
  emit([&](std::size_t c) { return cols[c].name; });
  for (const auto& line : cells) emit([&](std::size_t c) { return line[c]; });
  return ss.str();
}

}  // namespace abco
