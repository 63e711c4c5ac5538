#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dopd/harness.hpp"
#include "dopd/metrics.hpp"

namespace py = pybind11;

namespace {

dopd::RunConfig config_from(const std::optional<std::string>& preset,
                            const std::map<std::string, std::string>& overrides) {
  std::vector<dopd::KeyValue> kv(overrides.begin(), overrides.end());
  return dopd::parse_config(preset, std::nullopt, kv);
}

py::dict log_to_dict(const dopd::MetricsLog& log) {
  py::dict d;
  d["seed"] = log.seed;
  d["config_hash"] = log.config_hash;
  d["n"] = log.n;
  d["T"] = log.T;
  d["avg_cum_loss"] = log.avg_cum_loss;
  d["avg_cum_ccv"] = log.avg_cum_ccv;
  d["cum_triggers"] = log.cum_triggers;
  py::dict fin;
  fin["avg_cum_loss"] = log.avg_cum_loss.back();
  fin["avg_cum_ccv"] = log.avg_cum_ccv.back();
  fin["total_triggers"] = log.cum_triggers.back();
  if (!log.comparator_cum_loss_static.empty())
    fin["regret_static"] = log.avg_cum_loss.back() - log.comparator_cum_loss_static.back();
  if (!log.comparator_cum_loss_dynamic.empty())
    fin["regret_dynamic"] = log.avg_cum_loss.back() - log.comparator_cum_loss_dynamic.back();
  d["final"] = fin;
  return d;
}

}  // namespace

PYBIND11_MODULE(dopd, m) {
  m.doc() = "event-triggered distributed bandit online optimization";

  m.def(
      "run",
      [](const std::optional<std::string>& preset,
         const std::map<std::string, std::string>& overrides, bool write_files) {
        const dopd::RunConfig config = config_from(preset, overrides);
        if (write_files) return log_to_dict(dopd::run_experiment(config));
        dopd::SimOptions options = dopd::build_sim_options(config);
        dopd::MetricsLog log = dopd::run_horizon(options);
        log.config_hash = dopd::config_hash(config);
        return log_to_dict(log);
      },
      py::arg("preset") = std::nullopt, py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("write_files") = false,
      "Run one experiment; write_files also emits metrics.csv/summary.json.");

  m.def(
      "step_params",
      [](int t, const std::optional<std::string>& preset,
         const std::map<std::string, std::string>& overrides) {
        const dopd::RunConfig config = config_from(preset, overrides);
        const dopd::SimOptions options = dopd::build_sim_options(config);
        const dopd::StepParams sp = options.schedule.params_at(t);
        py::dict d;
        d["alpha"] = sp.alpha;
        d["beta"] = sp.beta;
        d["gamma"] = sp.gamma;
        d["xi"] = sp.xi;
        d["delta"] = sp.delta;
        d["tau"] = sp.tau;
        d["psi"] = sp.psi;
        return d;
      },
      py::arg("t"), py::arg("preset") = std::nullopt,
      py::arg("overrides") = std::map<std::string, std::string>{},
      "Schedule parameters at round t for the configured run.");

  m.def(
      "project",
      [](const std::string& kind, double size, const std::vector<double>& x, double shrink) {
        const int p = static_cast<int>(x.size());
        const dopd::FeasibleSet set = kind == "ball" ? dopd::FeasibleSet::ball(size, p)
                                                     : dopd::FeasibleSet::box(size, p);
        dopd::Vector v(p);
        for (int i = 0; i < p; ++i) v[i] = x[i];
        const dopd::Vector y = set.project(shrink, v);
        return std::vector<double>(y.data(), y.data() + y.size());
      },
      py::arg("kind"), py::arg("size"), py::arg("x"), py::arg("shrink") = 1.0,
      "Euclidean projection onto shrink * set.");

  m.def("preset_names", &dopd::preset_names);

  m.def(
      "canonical_config",
      [](const std::optional<std::string>& preset,
         const std::map<std::string, std::string>& overrides) {
        return dopd::canonical_config(config_from(preset, overrides));
      },
      py::arg("preset") = std::nullopt,
      py::arg("overrides") = std::map<std::string, std::string>{});
}
