// Copyright 2026 The enasfarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "enasfarm/arch_ir.hpp"
#include "enasfarm/backend.hpp"
#include "enasfarm/config.hpp"
#include "enasfarm/decode.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/genotype.hpp"
#include "enasfarm/report.hpp"
#include "enasfarm/session.hpp"
#include "enasfarm/strategy.hpp"

namespace py = pybind11;
using namespace enasfarm;

namespace {

py::dict accounting_dict(const FarmAccounting& a) {
  py::dict d;
  d["jobs"] = a.jobs;
  d["attempts"] = a.attempts;
  d["failed"] = a.failed;
  d["busy_seconds"] = a.busy_seconds;
  d["wall_seconds"] = a.wall_seconds;
  d["gpu_days"] = a.gpu_days();
  return d;
}

py::dict individual_dict(const Individual& ind) {
  py::dict d;
  d["name"] = ind.name();
  d["encoding"] = canonical_serialize(ind.genotype());
  d["identifier"] = ind.id().hex();
  d["fitness"] = ind.accuracy().to_string();
  return d;
}

py::dict stats_dict(const ArchStats& s) {
  py::dict d;
  d["depth"] = s.depth;
  d["params"] = s.params;
  d["flops"] = s.flops;
  return d;
}

}  // namespace

PYBIND11_MODULE(_enasfarm, m) {
  m.doc() = "Evolutionary architecture search on a farm of training slots";

  auto base = py::register_exception<Error>(m, "EnasfarmError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<RestartError>(m, "RestartError", base);
  py::register_exception<ReportError>(m, "ReportError", base);
  py::register_exception<MixedSettingsError>(m, "MixedSettingsError", base);
  py::register_exception<ParseError>(m, "ParseError", base);

  m.def("strategies", &strategy_names, "Keys accepted by run_algorithm.");

  m.def(
      "canonical", [](const std::string& text) { return canonical_serialize(parse_genotype(text)); },
      py::arg("encoding"), "Canonical form of a genotype encoding.");
  m.def(
      "identifier", [](const std::string& text) { return identifier(parse_genotype(text)).hex(); },
      py::arg("encoding"), "SHA-224 identifier (56 hex digits) of a genotype encoding.");
  m.def(
      "arch_stats",
      [](const std::string& text, const std::string& dataset) {
        const auto info = dataset_info(dataset);
        return stats_dict(arch_stats(decode(parse_genotype(text), info.input, info.classes)));
      },
      py::arg("encoding"), py::arg("dataset") = "CIFAR10", "depth, params and flops (MACs) of the decoded network.");

  m.def(
      "surrogate_percent",
      [](double asymptote, int epochs, double tau, double noise) {
        return Fitness::from_percent(surrogate_percent(asymptote, epochs, tau, noise)).to_string();
      },
      py::arg("asymptote"), py::arg("epochs"), py::arg("tau") = 20.0, py::arg("noise") = 0.0);

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::filesystem::path& global, const std::filesystem::path& train,
                       const std::filesystem::path& root, bool simulate) {
             return std::make_unique<Session>(global, train, root, SessionOptions{simulate, ""});
           }),
           py::arg("global_ini"), py::arg("train_ini"), py::arg("root"), py::arg("simulate") = true)
      .def_static(
          "open", [](const std::filesystem::path& dir, bool simulate) { return Session::open(dir, {simulate, ""}); },
          py::arg("run_dir"), py::arg("simulate") = true)
      .def(
          "run",
          [](Session& s) {
            const auto best = [&] {
              py::gil_scoped_release release;
              return s.run();
            }();
            return individual_dict(best);
          },
          "Runs or resumes the search; returns the best member.")
      .def("retrain",
           [](Session& s, int epochs) {
             std::optional<TrainConfig> cfg;
             if (epochs > 0) {
               cfg = retrain_defaults(s.configs().train);
               cfg->trainer.total_epochs = epochs;
             }
             const auto r = s.retrain(cfg);
             py::dict d;
             d["name"] = r.name;
             d["identifier"] = r.id;
             d["search"] = r.search.to_string();
             d["retrain"] = r.retrain.to_string();
             d["epochs"] = r.epochs;
             return d;
           },
           py::arg("epochs") = 0)
      .def("accounting", [](const Session& s) { return accounting_dict(s.accounting()); })
      .def_property_readonly("run_dir", [](const Session& s) { return s.run_dir(); });

  m.def(
      "compare",
      [](const std::vector<std::filesystem::path>& dirs, bool allow_mixed, const std::string& format) {
        const auto report = compare(dirs, allow_mixed);
        if (format == "csv") return report.csv();
        if (format == "table") return report.table();
        throw py::value_error("format must be 'csv' or 'table'");
      },
      py::arg("dirs"), py::arg("allow_mixed") = false, py::arg("format") = "csv");
}
