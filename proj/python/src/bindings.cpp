#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "abco/detect.hpp"
#include "abco/eval.hpp"
#include "abco/extensions.hpp"
#include "abco/gibbs.hpp"
#include "abco/io.hpp"
#include "abco/simgen.hpp"

namespace py = pybind11;
using namespace abco;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  Array a({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

TimeSeries make_series(const Array& y, const std::optional<Array>& design, const std::vector<std::string>& labels) {
  if (y.ndim() != 1) throw py::value_error("y must be one-dimensional");
  TimeSeries ts;
  ts.values.assign(y.data(), y.data() + y.size());
  ts.labels = labels;
  if (design) {
    const auto& x = *design;
    if (x.ndim() != 2) throw py::value_error("design must be two-dimensional");
    Matrix m(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
    m.data.assign(x.data(), x.data() + x.size());
    ts.design = std::move(m);
  }
  return ts;
}

py::dict draws_dict(const PosteriorDraws& d) {
  const std::size_t n = d.increments();
  py::dict out;
  out["count"] = d.count;
  out["t_len"] = d.t_len;
  out["d"] = d.d;
  out["method"] = d.method;
  out["beta"] = to_matrix(d.beta, d.count, d.t_len);
  out["zeta"] = to_matrix(d.zeta, d.count, d.t_len);
  out["zeta_var"] = to_matrix(d.zeta_var, d.count, d.t_len);
  out["sigma_eps2"] = to_matrix(d.sigma_eps2, d.count, d.t_len);
  out["log_omega2"] = to_matrix(d.log_omega2, d.count, n);
  out["h"] = to_matrix(d.h, d.count, n);
  out["gamma"] = to_array(d.gamma);
  out["mu"] = to_array(d.mu);
  out["phi1"] = to_array(d.phi1);
  out["phi2"] = to_array(d.phi2);
  out["tau2"] = to_array(d.tau2);
  out["deviance"] = to_array(d.deviance);
  return out;
}

py::dict summary_dict(const SampleSummary& s) {
  py::dict out;
  out["mean"] = s.mean;
  out["sd"] = s.sd;
  out["lo95"] = s.lo95;
  out["median"] = s.median;
  out["hi95"] = s.hi95;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive Bayesian changepoint detection with outliers";

  static py::exception<Error> abco_error(m, "AbcoError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = abco_error;
      py::object inst = err(std::string(e.what()));
      inst.attr("code") = to_string(e.code());
      PyErr_SetObject(abco_error.ptr(), inst.ptr());
    }
  });

  py::class_<PriorHyper>(m, "PriorHyper")
      .def(py::init<>())
      .def_readwrite("z_alpha", &PriorHyper::z_alpha)
      .def_readwrite("z_beta", &PriorHyper::z_beta)
      .def_readwrite("phi1_beta_a", &PriorHyper::phi1_beta_a)
      .def_readwrite("phi1_beta_b", &PriorHyper::phi1_beta_b)
      .def_readwrite("phi2_mean", &PriorHyper::phi2_mean)
      .def_readwrite("phi2_sd", &PriorHyper::phi2_sd)
      .def_readwrite("tau_scale_factor", &PriorHyper::tau_scale_factor)
      .def_readwrite("outlier_global_scale", &PriorHyper::outlier_global_scale)
      .def_readwrite("outlier_local_scale", &PriorHyper::outlier_local_scale)
      .def_readwrite("sv_mu_prior_sd", &PriorHyper::sv_mu_prior_sd)
      .def_readwrite("sv_phi_beta_a", &PriorHyper::sv_phi_beta_a)
      .def_readwrite("sv_phi_beta_b", &PriorHyper::sv_phi_beta_b)
      .def_readwrite("sv_sigma_ig_shape", &PriorHyper::sv_sigma_ig_shape)
      .def_readwrite("sv_sigma_ig_scale", &PriorHyper::sv_sigma_ig_scale)
      .def_readwrite("noise_ig_shape", &PriorHyper::noise_ig_shape)
      .def_readwrite("noise_ig_scale", &PriorHyper::noise_ig_scale);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("d", &ModelConfig::d)
      .def_readwrite("iters", &ModelConfig::iters)
      .def_readwrite("burn", &ModelConfig::burn)
      .def_readwrite("thin", &ModelConfig::thin)
      .def_readwrite("seed", &ModelConfig::seed)
      .def_readwrite("use_sv_noise", &ModelConfig::use_sv_noise)
      .def_readwrite("use_outliers", &ModelConfig::use_outliers)
      .def_readwrite("horseshoe", &ModelConfig::horseshoe)
      .def_readwrite("cp_prob_cutoff", &ModelConfig::cp_prob_cutoff)
      .def_readwrite("outlier_cutoff", &ModelConfig::outlier_cutoff)
      .def_readwrite("min_cp_separation", &ModelConfig::min_cp_separation)
      .def_readwrite("grid_size", &ModelConfig::grid_size)
      .def_readwrite("priors", &ModelConfig::priors)
      .def("retained", &ModelConfig::retained)
      .def("to_json", [](const ModelConfig& c) { return config_to_json(c); })
      .def_static("from_json", [](const std::string& s) { return config_from_json(s); })
      .def("__eq__", [](const ModelConfig& a, const ModelConfig& b) { return a == b; });

  py::class_<ChangepointReport>(m, "ChangepointReport")
      .def_readonly("method", &ChangepointReport::method)
      .def_readonly("d", &ChangepointReport::d)
      .def_readonly("t_len", &ChangepointReport::t_len)
      .def_readonly("draws", &ChangepointReport::draws)
      .def_readonly("changepoints", &ChangepointReport::changepoints)
      .def_readonly("flagged_outliers", &ChangepointReport::flagged_outliers)
      .def_property_readonly("cp_prob", [](const ChangepointReport& r) { return to_array(r.cp_prob); })
      .def_property_readonly("outlier_scores", [](const ChangepointReport& r) { return to_array(r.outlier_scores); })
      .def_property_readonly("trend_mean", [](const ChangepointReport& r) { return to_array(r.trend_mean); })
      .def_property_readonly("trend_lo95", [](const ChangepointReport& r) { return to_array(r.trend_lo95); })
      .def_property_readonly("trend_hi95", [](const ChangepointReport& r) { return to_array(r.trend_hi95); })
      .def_property_readonly("obs_lo95", [](const ChangepointReport& r) { return to_array(r.obs_lo95); })
      .def_property_readonly("obs_hi95", [](const ChangepointReport& r) { return to_array(r.obs_hi95); })
      .def_readonly("dic", &ChangepointReport::dic)
      .def_readonly("gamma_mean", &ChangepointReport::gamma_mean)
      .def_readonly("phi1_mean", &ChangepointReport::phi1_mean)
      .def_readonly("phi2_mean", &ChangepointReport::phi2_mean)
      .def_readonly("tau2_mean", &ChangepointReport::tau2_mean)
      .def("to_json", [](const ChangepointReport& r, const ModelConfig& c) { return report_to_json(r, c); },
           py::arg("config") = ModelConfig{});

  py::class_<RegressionReport>(m, "RegressionReport")
      .def_readonly("predictors", &RegressionReport::predictors)
      .def_readonly("dic", &RegressionReport::dic)
      .def_readonly("rank_warning", &RegressionReport::rank_warning);

  py::class_<BenchmarkRow>(m, "BenchmarkRow")
      .def_readonly("method", &BenchmarkRow::method)
      .def_readonly("rand_avg", &BenchmarkRow::rand_avg)
      .def_readonly("adj_rand_avg", &BenchmarkRow::adj_rand_avg)
      .def_readonly("avg_no_cp", &BenchmarkRow::avg_no_cp)
      .def_readonly("n_zero_cp", &BenchmarkRow::n_zero_cp)
      .def_readonly("avg_dist", &BenchmarkRow::avg_dist)
      .def_readonly("avg_diff_cp", &BenchmarkRow::avg_diff_cp)
      .def_readonly("se", &BenchmarkRow::se)
      .def_readonly("tpr", &BenchmarkRow::tpr)
      .def_readonly("fpr", &BenchmarkRow::fpr)
      .def_readonly("avg_cp_per_predictor", &BenchmarkRow::avg_cp_per_predictor)
      .def_readonly("n_reps", &BenchmarkRow::n_reps)
      .def_readonly("failures", &BenchmarkRow::failures)
      .def_readonly("adj_rand", &BenchmarkRow::adj_rand);

  m.def("scenarios", [] {
    std::vector<std::string> names;
    for (auto k : all_scenarios()) names.push_back(scenario_name(k));
    return names;
  });

  m.def(
      "simulate",
      [](const std::string& name, std::uint64_t seed, std::optional<std::size_t> t_len,
         const std::map<std::string, double>& params, const std::string& outlier_size) {
        const auto kind = parse_scenario(name);
        if (!kind) throw py::value_error("unknown scenario '" + name + "'");
        auto sc = default_scenario(*kind, seed);
        if (t_len) sc.t_len = *t_len;
        sc.params = params;
        sc.outlier_size = outlier_size;
        const auto sim = generate(sc);
        py::dict out;
        out["y"] = to_array(sim.series.values);
        if (sim.series.design)
          out["design"] = to_matrix(sim.series.design->data, sim.series.design->rows, sim.series.design->cols);
        else
          out["design"] = py::none();
        out["changepoints"] = sim.truth.changepoints;
        out["segment_labels"] = sim.truth.segment_labels;
        out["true_trend"] = to_array(sim.truth.true_trend);
        out["outliers"] = sim.truth.outliers;
        out["predictor_changepoints"] = sim.truth.predictor_changepoints;
        out["d"] = natural_order(*kind);
        return out;
      },
      py::arg("scenario"), py::arg("seed") = 1, py::arg("t_len") = py::none(),
      py::arg("params") = std::map<std::string, double>{}, py::arg("outlier_size") = "large");

  m.def(
      "fit",
      [](const Array& y, const ModelConfig& config, const std::vector<std::string>& labels) {
        const auto ts = make_series(y, std::nullopt, labels);
        py::gil_scoped_release release;
        return make_report(run(ts, config), config, labels);
      },
      py::arg("y"), py::arg("config") = ModelConfig{}, py::arg("labels") = std::vector<std::string>{});

  m.def(
      "fit_draws",
      [](const Array& y, const ModelConfig& config) {
        const auto ts = make_series(y, std::nullopt, {});
        PosteriorDraws draws;
        {
          py::gil_scoped_release release;
          draws = run(ts, config);
        }
        return draws_dict(draws);
      },
      py::arg("y"), py::arg("config") = ModelConfig{});

  m.def(
      "fit_regression",
      [](const Array& y, const Array& design, const ModelConfig& config) {
        const auto ts = make_series(y, design, {});
        py::gil_scoped_release release;
        return make_regression_report(fit_regression(ts, config), config);
      },
      py::arg("y"), py::arg("design"), py::arg("config") = ModelConfig{});

  m.def(
      "fit_interrupted",
      [](const Array& y, std::size_t pi, const ModelConfig& config, std::optional<double> upsilon_var) {
        const auto ts = make_series(y, std::nullopt, {});
        ItsFit fit;
        {
          py::gil_scoped_release release;
          fit = fit_interrupted(ts, config, ItsConfig{pi, upsilon_var});
        }
        py::dict out;
        out["pi"] = fit.pi;
        out["upsilon_var"] = fit.upsilon_var;
        out["level_shift"] = to_array(fit.level_shift);
        out["slope_change"] = to_array(fit.slope_change);
        out["level_summary"] = summary_dict(fit.level_summary);
        out["slope_summary"] = summary_dict(fit.slope_summary);
        out["report"] = make_report(fit.draws, config);
        return out;
      },
      py::arg("y"), py::arg("pi"), py::arg("config") = ModelConfig{}, py::arg("upsilon_var") = py::none());

  m.def(
      "rand_index",
      [](const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth, std::size_t t_len) {
        return rand_index(pred, truth, t_len);
      },
      py::arg("pred"), py::arg("truth"), py::arg("t_len"));
  m.def(
      "adjusted_rand",
      [](const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth, std::size_t t_len) {
        return adjusted_rand(pred, truth, t_len);
      },
      py::arg("pred"), py::arg("truth"), py::arg("t_len"));
  m.def(
      "cp_metrics",
      [](const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth) {
        const auto cm = cp_metrics(pred, truth);
        py::dict out;
        out["avg_dist_to_true"] = cm.avg_dist_to_true ? py::cast(*cm.avg_dist_to_true) : py::none();
        out["diff_cp_count"] = cm.diff_cp_count;
        out["n_pred"] = cm.n_pred;
        return out;
      },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "outlier_metrics",
      [](const std::vector<std::size_t>& flagged, const std::vector<std::size_t>& truth, std::size_t t_len) {
        const auto om = outlier_metrics(flagged, truth, t_len);
        return py::make_tuple(om.tpr, om.fpr);
      },
      py::arg("flagged"), py::arg("truth"), py::arg("t_len"));
  m.def(
      "pelt",
      [](const Array& y, std::optional<double> penalty, std::size_t min_seg) {
        const std::vector<double> v(y.data(), y.data() + y.size());
        return pelt_baseline(v, penalty, min_seg);
      },
      py::arg("y"), py::arg("penalty") = py::none(), py::arg("min_seg") = 2);

  m.def(
      "run_benchmark",
      [](const std::string& name, int n_reps, const std::vector<std::string>& methods, const ModelConfig& config,
         std::uint64_t seed, std::optional<std::size_t> t_len, int jobs) {
        const auto kind = parse_scenario(name);
        if (!kind) throw py::value_error("unknown scenario '" + name + "'");
        auto sc = default_scenario(*kind, seed);
        if (t_len) sc.t_len = *t_len;
        std::vector<Method> ms;
        for (const auto& n : methods) ms.push_back(builtin_method(n));
        py::gil_scoped_release release;
        return run_benchmark(sc, n_reps, ms, config, jobs);
      },
      py::arg("scenario"), py::arg("n_reps"), py::arg("methods"), py::arg("config") = ModelConfig{},
      py::arg("seed") = 1, py::arg("t_len") = py::none(), py::arg("jobs") = 1);
}
