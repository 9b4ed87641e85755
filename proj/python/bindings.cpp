#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>
#include <vector>

#include "manisac/channel.hpp"
#include "manisac/engine.hpp"
#include "manisac/metrics.hpp"

namespace py = pybind11;
using namespace manisac;

namespace {

std::vector<std::pair<double, double>> to_pairs(const std::vector<Vec2>& v) {
  std::vector<std::pair<double, double>> out;
  out.reserve(v.size());
  for (const Vec2& p : v) out.emplace_back(p.x(), p.y());
  return out;
}

}  // namespace

PYBIND11_MODULE(manisac_core, m) {
  m.doc() = "networked ISAC movable-antenna optimizer core";

  py::class_<channel::GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init<>())
      .def_property(
          "m_t", [](const channel::GeneratorConfig& c) { return c.dims.mt; },
          [](channel::GeneratorConfig& c, int v) { c.dims.mt = v; })
      .def_property(
          "m_r", [](const channel::GeneratorConfig& c) { return c.dims.mr; },
          [](channel::GeneratorConfig& c, int v) { c.dims.mr = v; })
      .def_property(
          "n_t", [](const channel::GeneratorConfig& c) { return c.dims.nt; },
          [](channel::GeneratorConfig& c, int v) { c.dims.nt = v; })
      .def_property(
          "n_r", [](const channel::GeneratorConfig& c) { return c.dims.nr; },
          [](channel::GeneratorConfig& c, int v) { c.dims.nr = v; })
      .def_property(
          "k_d", [](const channel::GeneratorConfig& c) { return c.dims.kd; },
          [](channel::GeneratorConfig& c, int v) { c.dims.kd = v; })
      .def_property(
          "k_u", [](const channel::GeneratorConfig& c) { return c.dims.ku; },
          [](channel::GeneratorConfig& c, int v) { c.dims.ku = v; })
      .def_property(
          "k_t", [](const channel::GeneratorConfig& c) { return c.dims.kt; },
          [](channel::GeneratorConfig& c, int v) { c.dims.kt = v; })
      .def_readwrite("paths", &channel::GeneratorConfig::paths)
      .def_readwrite("radius_m", &channel::GeneratorConfig::radius_m)
      .def_readwrite("c0", &channel::GeneratorConfig::c0)
      .def_readwrite("alpha_loss", &channel::GeneratorConfig::alpha_loss)
      .def_readwrite("tx_power", &channel::GeneratorConfig::tx_power)
      .def_readwrite("ul_power", &channel::GeneratorConfig::ul_power)
      .def_readwrite("noise", &channel::GeneratorConfig::noise)
      .def_readwrite("gamma_r", &channel::GeneratorConfig::gamma_r)
      .def_readwrite("rcs_var", &channel::GeneratorConfig::rcs_var)
      .def_readwrite("region_a", &channel::GeneratorConfig::region_a)
      .def_readwrite("min_dist", &channel::GeneratorConfig::min_dist);

  py::class_<engine::EngineConfig>(m, "EngineConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &engine::EngineConfig::epsilon)
      .def_readwrite("max_outer", &engine::EngineConfig::max_outer)
      .def_readwrite("restoration", &engine::EngineConfig::restoration)
      .def_property(
          "scheme",
          [](const engine::EngineConfig& c) {
            return engine::scheme_to_string(c.scheme);
          },
          [](engine::EngineConfig& c, const std::string& s) {
            c.scheme = engine::scheme_from_string(s);
          });

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("gamma_r",
                             [](const Scenario& sc) { return sc.gamma_r; });

  py::class_<engine::IterateRecord>(m, "IterateRecord")
      .def_readonly("iter", &engine::IterateRecord::iter)
      .def_readonly("sum_rate", &engine::IterateRecord::sum_rate)
      .def_readonly("sinr_radar", &engine::IterateRecord::sinr_radar)
      .def_readonly("power_residual", &engine::IterateRecord::power_residual)
      .def_readonly("distance_residual",
                    &engine::IterateRecord::distance_residual);

  py::class_<engine::RunResult>(m, "RunResult")
      .def_readonly("feasible", &engine::RunResult::feasible)
      .def_readonly("iterates", &engine::RunResult::iterates)
      .def_property_readonly("sum_rate",
                             [](const engine::RunResult& r) {
                               return r.iterates.empty()
                                          ? 0.0
                                          : r.iterates.back().sum_rate;
                             })
      .def_property_readonly("tbs_positions",
                             [](const engine::RunResult& r) {
                               std::vector<std::vector<std::pair<double, double>>> out;
                               for (const auto& arr : r.layout.tbs)
                                 out.push_back(to_pairs(arr));
                               return out;
                             })
      .def_property_readonly("rbs_positions",
                             [](const engine::RunResult& r) {
                               std::vector<std::vector<std::pair<double, double>>> out;
                               for (const auto& arr : r.layout.rbs)
                                 out.push_back(to_pairs(arr));
                               return out;
                             })
      .def_property_readonly("dl_user_positions",
                             [](const engine::RunResult& r) {
                               return to_pairs(r.layout.dl_user);
                             })
      .def_property_readonly("ul_user_positions",
                             [](const engine::RunResult& r) {
                               return to_pairs(r.layout.ul_user);
                             });

  m.def("generate_scenario", &channel::generate_scenario, py::arg("config"),
        py::arg("seed"), "Draw a random scenario, deterministic in the seed.");
  m.def("run", &engine::run, py::arg("scenario"), py::arg("config"),
        py::arg("seed"),
        "Block-coordinate ascent; returns the iterate trace and final state.");
}
