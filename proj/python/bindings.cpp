#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "fairsched/config.hpp"
#include "fairsched/cost.hpp"
#include "fairsched/experiment.hpp"

namespace py = pybind11;
using namespace fairsched;

namespace {

// Configs cross the boundary as JSON text; the Python side wraps them in dicts.
ExperimentConfig parse(const std::string& text) {
  ExperimentConfig c = config_from_json(nlohmann::json::parse(text));
  c.validate();
  return c;
}

nlohmann::json report_json(const BoundReport& r) {
  return {{"check", r.check},       {"subject", r.subject}, {"measured", r.measured},
          {"bound", r.bound},       {"margin", r.margin},   {"applicable", r.applicable},
          {"pass", r.pass},         {"guaranteed", r.guaranteed}, {"witness", r.witness}};
}

std::string result_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["summary"] = r.summary.to_json();
  j["reports"] = nlohmann::json::array();
  for (const auto& rep : r.reports) j["reports"].push_back(report_json(rep));
  j["config"] = config_to_json(r.config);
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete-event simulator for fair, locality-aware LLM request scheduling";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("default_config", [] { return config_to_json(ExperimentConfig{}).dump(); });

  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse(text)).dump(); },
        py::arg("config_json"));

  m.def(
      "run",
      [](const std::string& text, const std::string& out) {
        const ExperimentConfig c = parse(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
          if (!out.empty()) write_artifacts(r, std::filesystem::path(out));
        }
        return result_json(r);
      },
      py::arg("config_json"), py::arg("out") = "");

  m.def(
      "sweep",
      [](const std::string& text) {
        const ExperimentConfig c = parse(text);
        std::vector<std::string> rows;
        std::vector<ExperimentResult> rs;
        {
          py::gil_scoped_release release;
          rs = sweep(c);
        }
        for (const auto& r : rs) rows.push_back(result_json(r));
        return rows;
      },
      py::arg("config_json"));

  m.def("jain_index", [](const std::vector<double>& v) { return jain_index(v); }, py::arg("values"));

  m.def(
      "compute_u",
      [](std::int64_t max_input, std::int64_t batch_tokens, Service w_e, Service w_q) {
        SystemParams p;
        p.max_input = max_input;
        p.batch_tokens = batch_tokens;
        p.weights = {w_e, w_q};
        return compute_U(p);
      },
      py::arg("max_input"), py::arg("batch_tokens"), py::arg("w_e") = 1, py::arg("w_q") = 2);
}
