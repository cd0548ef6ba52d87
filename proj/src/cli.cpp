#include "abco/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "abco/detect.hpp"
#include "abco/eval.hpp"
#include "abco/extensions.hpp"
#include "abco/io.hpp"
#include "abco/simgen.hpp"

namespace abco {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitSampler = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (val.empty() || *end != '\0' || !std::isfinite(v))
      throw UsageError("--param " + key + ": '" + val + "' is not a number");
    out[key] = v;
  }
  return out;
}

ScenarioKind scenario_or_throw(const std::string& name) {
  auto kind = parse_scenario(name);
  if (!kind) {
    std::string known;
    for (auto k : all_scenarios()) known += (known.empty() ? "" : ", ") + scenario_name(k);
    throw UsageError("unknown scenario '" + name + "' (known: " + known + ")");
  }
  return *kind;
}

ProgressFn progress_printer(std::ostream& err, bool quiet) {
  if (quiet) return {};
  const auto start = std::chrono::steady_clock::now();
  return [&err, start](int it, int total) {
    if (it % 500 != 0 && it != total) return;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream ss;
    ss << "iteration " << it << "/" << total << " (" << std::fixed << std::setprecision(1) << secs << " s)\n";
    err << ss.str() << std::flush;
  };
}

// ---- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::optional<std::size_t> t_len;
  std::uint64_t seed = 1;
  int reps = 1;
  std::vector<std::string> params;
  std::string outlier_size = "large";
  std::string out_dir = ".";
  std::string out;
  int jobs = default_jobs();
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario sc = default_scenario(scenario_or_throw(a.scenario), a.seed);
  if (a.t_len) sc.t_len = *a.t_len;
  sc.params = parse_params(a.params);
  sc.outlier_size = a.outlier_size;
  if (a.reps < 1) throw UsageError("--reps must be >= 1");
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + a.out_dir + ": " + ec.message());

  const std::string stem = a.out.empty() ? a.scenario : a.out;
  const auto reps = static_cast<std::size_t>(a.reps);
  std::vector<std::string> written(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < reps;) {
      try {
        Scenario rep = sc;
        rep.seed = sc.seed + i;
        const auto sim = generate(rep);
        const std::string base = (fs::path(a.out_dir) / (a.reps == 1 ? stem : stem + "_" + std::to_string(i))).string();
        write_file(base + ".csv", series_to_csv(sim.series));
        write_file(base + ".truth.json", truth_to_json(sim.truth, rep));
        written[i] = base;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min(a.jobs, a.reps));
  std::vector<std::thread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& base : written) out << base << ".csv\n";
  return kExitOk;
}

// ---- fit ----------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string config_path;
  std::optional<int> d;
  std::optional<int> iters;
  std::optional<int> burn;
  std::optional<int> thin;
  std::optional<std::uint64_t> seed;
  bool no_sv = false;
  bool no_outliers = false;
  bool horseshoe = false;
  std::optional<std::size_t> intervention;
  std::optional<double> upsilon_var;
  std::optional<double> cutoff;
  std::string out;
  bool quiet = false;
};

ModelConfig fit_config(const FitArgs& a) {
  ModelConfig c;
  if (!a.config_path.empty()) c = merge_config_json(c, read_file(a.config_path));
  if (a.d) c.d = *a.d;
  if (a.iters) c.iters = *a.iters;
  if (a.burn) c.burn = *a.burn;
  if (a.thin) c.thin = *a.thin;
  if (a.seed) c.seed = *a.seed;
  if (a.no_sv) c.use_sv_noise = false;
  if (a.no_outliers) c.use_outliers = false;
  if (a.horseshoe) c.horseshoe = true;
  if (a.cutoff) c.cp_prob_cutoff = *a.cutoff;
  return c;
}

std::string default_out(const std::string& input) {
  fs::path p(input);
  return (p.parent_path() / (p.stem().string() + ".report")).string();
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const TimeSeries series = read_series_csv(a.input);
  const ModelConfig config = fit_config(a);
  const auto check = validate_config(config, series);
  if (!check.ok()) {
    for (const auto& issue : check.issues) err << "error: " << to_string(issue.code) << ": " << issue.message << "\n";
    return kExitUsage;
  }
  const auto progress = progress_printer(err, a.quiet);
  const std::string base = a.out.empty() ? default_out(a.input) : a.out;

  ChangepointReport report;
  ReportExtras extras;
  if (a.intervention) {
    if (series.design) throw UsageError("--intervention cannot be combined with predictor columns");
    ItsFit fit = fit_interrupted(series, config, ItsConfig{*a.intervention, a.upsilon_var}, progress);
    report = make_report(fit.draws, config, series.labels);
    fit.draws = PosteriorDraws{};
    extras.its = std::move(fit);
  } else if (series.design) {
    const auto draws = fit_regression(series, config, progress);
    auto reg = make_regression_report(draws, config, series.labels);
    if (reg.rank_warning) err << "warning: predictor design is rank deficient\n";
    report = reg.predictors.front();
    report.dic = reg.dic;
    extras.regression = std::move(reg);
  } else {
    const auto draws = run(series, config, progress);
    report = make_report(draws, config, series.labels);
  }

  write_file(base + ".json", report_to_json(report, config, extras));
  write_file(base + ".csv", report_to_csv(series, report));
  if (extras.regression) {
    const auto& preds = extras.regression->predictors;
    for (std::size_t j = 0; j < preds.size(); ++j)
      for (auto cp : preds[j].changepoints) out << "x" << j + 1 << "," << cp << "\n";
  } else {
    for (auto cp : report.changepoints) out << cp << "\n";
  }
  return kExitOk;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  std::string scenario;
  int reps = 10;
  std::string methods = "abco,horseshoe,pelt";
  int jobs = default_jobs();
  std::optional<std::size_t> t_len;
  std::uint64_t seed = 1;
  std::vector<std::string> params;
  std::string outlier_size = "large";
  std::optional<int> d;
  int iters = 4000;
  int burn = 1500;
  std::string config_path;
  std::string out;
  bool csv = false;
  bool no_sv = false;
  bool no_outliers = false;
};

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, path + ": invalid JSON: " + e.what());
  }
}

int cmd_evaluate_single(const EvaluateArgs& a, std::ostream& out) {
  const json pred = read_json_file(a.pred);
  const json truth = read_json_file(a.truth);
  std::vector<std::size_t> pred_cps, true_cps, true_out;
  std::optional<std::vector<std::size_t>> flagged;
  std::size_t t_len = 0;
  try {
    pred_cps = pred.at("changepoints").get<std::vector<std::size_t>>();
    true_cps = truth.at("changepoints").get<std::vector<std::size_t>>();
    true_out = truth.value("outliers", std::vector<std::size_t>{});
    if (pred.contains("flagged_outliers")) flagged = pred["flagged_outliers"].get<std::vector<std::size_t>>();
    t_len = truth.at("t_len").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("missing field: ") + e.what());
  }
  if (pred.contains("t_len") && pred["t_len"].get<std::size_t>() != t_len)
    throw UsageError("prediction and truth have different lengths");

  const auto m = cp_metrics(pred_cps, true_cps);
  json j{{"schema_version", kSchemaVersion},
         {"t_len", t_len},
         {"rand", rand_index(pred_cps, true_cps, t_len)},
         {"adjusted_rand", adjusted_rand(pred_cps, true_cps, t_len)},
         {"n_pred", m.n_pred},
         {"n_true", true_cps.size()},
         {"diff_cp_count", m.diff_cp_count}};
  j["avg_dist_to_true"] = m.avg_dist_to_true ? json(*m.avg_dist_to_true) : json(nullptr);
  if (flagged && !true_out.empty()) {
    const auto om = outlier_metrics(*flagged, true_out, t_len);
    j["tpr"] = om.tpr;
    j["fpr"] = om.fpr;
  }
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty())
    out << text;
  else
    write_file(a.out, text);
  return kExitOk;
}

int cmd_evaluate_benchmark(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = default_scenario(scenario_or_throw(a.scenario), a.seed);
  if (a.t_len) sc.t_len = *a.t_len;
  sc.params = parse_params(a.params);
  sc.outlier_size = a.outlier_size;

  ModelConfig config;
  config.d = natural_order(sc.kind);
  config.iters = a.iters;
  config.burn = a.burn;
  if (!a.config_path.empty()) config = merge_config_json(config, read_file(a.config_path));
  if (a.d) config.d = *a.d;
  if (a.no_sv) config.use_sv_noise = false;
  if (a.no_outliers) config.use_outliers = false;
  config.seed = a.seed;
  if (config.d < 1 || config.d > kMaxOrder) throw UsageError("--d must be 1, 2 or 3");
  if (config.burn >= config.iters) throw UsageError("--burn must be below --iters");

  std::vector<Method> methods;
  std::stringstream ss(a.methods);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    try {
      methods.push_back(builtin_method(name));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (methods.empty()) throw UsageError("--methods is empty");

  const auto rows = run_benchmark(sc, a.reps, methods, config, a.jobs);
  for (const auto& r : rows)
    if (r.failures) err << "warning: " << r.method << " failed on " << r.failures << " replicate(s)\n";
  if (!a.out.empty()) {
    write_file(a.out + ".csv", benchmark_to_csv(rows));
    write_file(a.out + ".txt", benchmark_to_text(rows));
  }
  out << (a.csv ? benchmark_to_csv(rows) : benchmark_to_text(rows));
  return kExitOk;
}

// ---- report -------------------------------------------------------------------

struct ReportArgs {
  std::string report;
  std::string data;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto report = report_from_json(read_file(a.report));
  if (!a.data.empty()) {
    const auto series = read_series_csv(a.data);
    if (series.size() != report.t_len) throw UsageError("data length does not match the report");
    write_file(a.out.empty() ? default_out(a.data) + ".csv" : a.out, report_to_csv(series, report));
  }
  std::ostringstream ss;
  ss << "method: " << report.method << "\n"
     << "order: " << report.d << "\n"
     << "length: " << report.t_len << "\n"
     << "draws: " << report.draws << "\n"
     << "dic: " << format_double(report.dic) << "\n"
     << "changepoints:";
  for (auto cp : report.changepoints) ss << " " << cp;
  ss << "\noutliers:";
  for (auto o : report.flagged_outliers) ss << " " << o;
  ss << "\n";
  out << ss.str();
  return kExitOk;
}

int dispatch(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::SamplerFailure || e.code() == ErrorCode::NotPositiveDefinite ? kExitSampler
                                                                                               : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSampler;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive Bayesian changepoint detection with outlier handling"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every command");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic series and ground truth");
  simulate->add_option("--scenario", sim.scenario, "Scenario name, e.g. linear-one-cp")->required();
  simulate->add_option("--t", sim.t_len, "Series length (default depends on the scenario)");
  simulate->add_option("--seed", sim.seed, "Base seed; replicate i uses seed + i")->capture_default_str();
  simulate->add_option("--reps", sim.reps, "Number of replicates")->capture_default_str();
  simulate->add_option("--param", sim.params, "Scenario parameter override key=value (repeatable)");
  simulate->add_option("--outlier-size", sim.outlier_size, "small, large or mixed (meet-up scenario)")
      ->check(CLI::IsMember({"small", "large", "mixed"}))
      ->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--out", sim.out, "File stem (default: scenario name)");
  simulate->add_option("--jobs", sim.jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Run the sampler on a CSV series and write a report");
  fitc->add_option("--input", fit.input, "CSV with a y column (optional t, x1..xp)")->required();
  fitc->add_option("--config", fit.config_path, "JSON model configuration; flags override it");
  fitc->add_option("--d", fit.d, "Difference order 1, 2 or 3")->check(CLI::Range(1, kMaxOrder));
  fitc->add_option("--iters", fit.iters, "Total sweeps")->check(CLI::PositiveNumber);
  fitc->add_option("--burn", fit.burn, "Discarded sweeps")->check(CLI::NonNegativeNumber);
  fitc->add_option("--thin", fit.thin, "Keep every n-th sweep")->check(CLI::PositiveNumber);
  fitc->add_option("--seed", fit.seed, "Sampler seed");
  fitc->add_flag("--no-sv", fit.no_sv, "Constant observation variance");
  fitc->add_flag("--no-outliers", fit.no_outliers, "Disable the outlier component");
  fitc->add_flag("--horseshoe", fit.horseshoe, "Static horseshoe baseline (no adaptive threshold dynamics)");
  fitc->add_option("--intervention", fit.intervention, "First post-intervention index (interrupted series mode)");
  fitc->add_option("--upsilon-var", fit.upsilon_var, "Prior variance of the intervention effects")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--cutoff", fit.cutoff, "Changepoint probability cutoff")->check(CLI::Range(0.0, 1.0));
  fitc->add_option("--out", fit.out, "Output stem; writes <out>.json and <out>.csv");
  fitc->add_flag("--quiet", fit.quiet, "No progress output");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions or run a benchmark");
  evaluate->add_option("--pred", ev.pred, "Report JSON (single-run mode)");
  evaluate->add_option("--truth", ev.truth, "Truth JSON (single-run mode)");
  evaluate->add_option("--scenario", ev.scenario, "Scenario name (benchmark mode)");
  evaluate->add_option("--reps", ev.reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--methods", ev.methods, "Comma list of abco, horseshoe, pelt")->capture_default_str();
  evaluate->add_option("--jobs", ev.jobs, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--t", ev.t_len, "Series length");
  evaluate->add_option("--seed", ev.seed, "Base seed for data and chains")->capture_default_str();
  evaluate->add_option("--param", ev.params, "Scenario parameter override key=value (repeatable)");
  evaluate->add_option("--outlier-size", ev.outlier_size, "small, large or mixed")
      ->check(CLI::IsMember({"small", "large", "mixed"}))
      ->capture_default_str();
  evaluate->add_option("--d", ev.d, "Difference order (default matches the scenario)")->check(CLI::Range(1, kMaxOrder));
  evaluate->add_option("--iters", ev.iters, "Sweeps per fit")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--burn", ev.burn, "Burn-in per fit")->check(CLI::NonNegativeNumber)->capture_default_str();
  evaluate->add_option("--config", ev.config_path, "JSON model configuration");
  evaluate->add_flag("--no-sv", ev.no_sv, "Constant observation variance");
  evaluate->add_flag("--no-outliers", ev.no_outliers, "Disable the outlier component");
  evaluate->add_option("--out", ev.out, "Metrics JSON path, or table stem in benchmark mode");
  evaluate->add_flag("--csv", ev.csv, "Print the benchmark table as CSV instead of aligned text");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Summarise a report JSON and rebuild its flat CSV");
  report->add_option("--input", rep.report, "Report JSON")->required();
  report->add_option("--data", rep.data, "Original CSV; when given the flat CSV is rewritten");
  report->add_option("--out", rep.out, "Flat CSV path");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    // help() already selects the parsed subcommand
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (simulate->parsed()) return dispatch([&] { return cmd_simulate(sim, out); }, err);
  if (fitc->parsed()) return dispatch([&] { return cmd_fit(fit, out, err); }, err);
  if (evaluate->parsed()) {
    return dispatch([&] {
      const bool single = !ev.pred.empty() || !ev.truth.empty();
      if (single && !ev.scenario.empty()) throw UsageError("use either --pred/--truth or --scenario");
      if (single) {
        if (ev.pred.empty() || ev.truth.empty()) throw UsageError("single-run mode needs both --pred and --truth");
        return cmd_evaluate_single(ev, out);
      }
      if (ev.scenario.empty()) throw UsageError("need --pred and --truth, or --scenario");
      return cmd_evaluate_benchmark(ev, out, err);
    }, err);
  }
  if (report->parsed()) return dispatch([&] { return cmd_report(rep, out); }, err);
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace abco
