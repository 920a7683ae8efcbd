// Python bindings for the core operations: model loading, scenario
// generation, the LP/MIP solvers, the dispatch and control phases, metrics
// and the end-to-end engine.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mgems/csv.hpp"
#include "mgems/engine.hpp"
#include "mgems/metrics.hpp"
#include "mgems/model.hpp"
#include "mgems/rtc.hpp"
#include "mgems/rtd.hpp"
#include "mgems/scenario.hpp"

namespace py = pybind11;
using namespace mgems;

PYBIND11_MODULE(_mgems, m) {
  m.doc() = "Microgrid two-phase energy management simulator";

  // --- model ---------------------------------------------------------------
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<csv::CsvError>(m, "CsvError");
  py::register_exception<lp::SolverError>(m, "SolverError");
  py::register_exception<engine::EngineError>(m, "EngineError");

  py::class_<Generator>(m, "Generator")
      .def(py::init<>())
      .def_readwrite("id", &Generator::id)
      .def_readwrite("p_min", &Generator::p_min)
      .def_readwrite("p_max", &Generator::p_max)
      .def_readwrite("ramp", &Generator::ramp)
      .def_readwrite("linear_cost", &Generator::linear_cost)
      .def_readwrite("no_load_cost", &Generator::no_load_cost)
      .def_readwrite("startup_cost", &Generator::startup_cost);

  py::class_<EnergyStorage>(m, "EnergyStorage")
      .def(py::init<>())
      .def_readwrite("id", &EnergyStorage::id)
      .def_readwrite("e_min", &EnergyStorage::e_min)
      .def_readwrite("e_max", &EnergyStorage::e_max)
      .def_readwrite("p_charge_min", &EnergyStorage::p_charge_min)
      .def_readwrite("p_charge_max", &EnergyStorage::p_charge_max)
      .def_readwrite("p_discharge_min", &EnergyStorage::p_discharge_min)
      .def_readwrite("p_discharge_max", &EnergyStorage::p_discharge_max)
      .def_readwrite("delta_p", &EnergyStorage::delta_p)
      .def_readwrite("delta_e", &EnergyStorage::delta_e)
      .def_readwrite("e_initial", &EnergyStorage::e_initial);

  py::class_<GridLink>(m, "GridLink")
      .def(py::init<>())
      .def_readwrite("p_max", &GridLink::p_max)
      .def_readwrite("buy_price", &GridLink::buy_price)
      .def_readwrite("sell_price", &GridLink::sell_price);

  py::class_<MicrogridModel>(m, "MicrogridModel")
      .def(py::init<>())
      .def_readwrite("generators", &MicrogridModel::generators)
      .def_readwrite("storage", &MicrogridModel::storage)
      .def_readwrite("grid", &MicrogridModel::grid)
      .def_readwrite("reserve_fraction", &MicrogridModel::reserve_fraction)
      .def_readwrite("dt_dispatch_s", &MicrogridModel::dt_dispatch_s)
      .def_readwrite("dt_control_s", &MicrogridModel::dt_control_s)
      .def_readwrite("window", &MicrogridModel::window)
      .def_readwrite("commitment", &MicrogridModel::commitment);

  m.def(
      "load_model",
      [](const std::string& text, const std::map<std::string, std::string>& series) {
        return load_model(text, [series](const std::string& ref) {
          auto it = series.find(ref);
          if (it == series.end())
            throw ConfigError("unresolved series reference: " + ref);
          return it->second;
        });
      },
      py::arg("config_text"), py::arg("series") = std::map<std::string, std::string>{});
  m.def("load_model_file", &load_model_file, py::arg("path"));
  m.def("serialize_model", &serialize_model);
  m.def("validate_model", &validate_model);
  m.def("intervals_per_dispatch", &intervals_per_dispatch);

  // --- scenario ------------------------------------------------------------
  py::class_<ForecastSeries>(m, "ForecastSeries")
      .def(py::init<>())
      .def_readwrite("load_kw", &ForecastSeries::load_kw)
      .def_readwrite("wind_kw", &ForecastSeries::wind_kw)
      .def_readwrite("solar_kw", &ForecastSeries::solar_kw)
      .def("horizon", &ForecastSeries::horizon)
      .def("netload_kw", &ForecastSeries::netload_kw);

  py::class_<ActualSeries>(m, "ActualSeries")
      .def(py::init<>())
      .def_readwrite("load_kw", &ActualSeries::load_kw)
      .def_readwrite("wind_kw", &ActualSeries::wind_kw)
      .def_readwrite("solar_kw", &ActualSeries::solar_kw)
      .def("ticks", &ActualSeries::ticks)
      .def("netload_kw", &ActualSeries::netload_kw);

  m.def("net_load", &net_load, py::arg("load_kw"), py::arg("wind_kw"), py::arg("solar_kw"));
  m.def("generate_actual", &generate_actual, py::arg("forecast"), py::arg("error_level"),
        py::arg("seed"), py::arg("model"));
  m.def("load_series", &load_series, py::arg("csv_text"));
  m.def("make_forecast", &make_forecast, py::arg("load_kw"), py::arg("wind_kw"),
        py::arg("solar_kw"));

  // --- lp / milp -----------------------------------------------------------
  py::enum_<lp::Relation>(m, "Relation")
      .value("LE", lp::Relation::LessEqual)
      .value("EQ", lp::Relation::Equal)
      .value("GE", lp::Relation::GreaterEqual);

  py::enum_<lp::LpStatus>(m, "LpStatus")
      .value("Optimal", lp::LpStatus::Optimal)
      .value("Infeasible", lp::LpStatus::Infeasible)
      .value("Unbounded", lp::LpStatus::Unbounded);

  py::class_<lp::LinearProgram>(m, "LinearProgram")
      .def(py::init<>())
      .def_readonly("n", &lp::LinearProgram::n)
      .def("add_variable", &lp::LinearProgram::add_variable, py::arg("lo"), py::arg("hi"),
           py::arg("cost"))
      .def("add_row", &lp::LinearProgram::add_row, py::arg("coeffs"), py::arg("rel"),
           py::arg("rhs"));

  py::class_<lp::LpSolution>(m, "LpSolution")
      .def_readonly("status", &lp::LpSolution::status)
      .def_readonly("x", &lp::LpSolution::x)
      .def_readonly("objective_value", &lp::LpSolution::objective_value)
      .def_readonly("iterations", &lp::LpSolution::iterations);

  m.def("solve_lp", [](const lp::LinearProgram& p) { return lp::solve_lp(p); });
  m.def("dump_lp", &lp::dump_lp);
  m.def("infinity", []() { return lp::kInf; });

  py::class_<milp::MixedProgram>(m, "MixedProgram")
      .def(py::init<>())
      .def_readwrite("lp", &milp::MixedProgram::lp)
      .def_readwrite("binary_indices", &milp::MixedProgram::binary_indices);

  py::enum_<milp::MipStatus>(m, "MipStatus")
      .value("Optimal", milp::MipStatus::Optimal)
      .value("Infeasible", milp::MipStatus::Infeasible);

  py::class_<milp::MipSolution>(m, "MipSolution")
      .def_readonly("status", &milp::MipSolution::status)
      .def_readonly("x", &milp::MipSolution::x)
      .def_readonly("objective_value", &milp::MipSolution::objective_value)
      .def_readonly("nodes_explored", &milp::MipSolution::nodes_explored);

  m.def("solve_mip", [](const milp::MixedProgram& p) { return milp::solve_mip(p); });

  // --- rtd / rtc -----------------------------------------------------------
  py::class_<rtd::DispatchTarget>(m, "DispatchTarget")
      .def_readonly("interval", &rtd::DispatchTarget::interval)
      .def_readonly("gen_kw", &rtd::DispatchTarget::gen_kw)
      .def_readonly("ess_net_kw", &rtd::DispatchTarget::ess_net_kw)
      .def_readonly("ess_planned_soc_kwh", &rtd::DispatchTarget::ess_planned_soc_kwh)
      .def_readonly("tie_target_kw", &rtd::DispatchTarget::tie_target_kw)
      .def_readonly("window_objective", &rtd::DispatchTarget::window_objective)
      .def_readonly("nodes_explored", &rtd::DispatchTarget::nodes_explored);

  py::class_<rtd::MpcState>(m, "MpcState")
      .def(py::init<>())
      .def_readwrite("soc_kwh", &rtd::MpcState::soc_kwh)
      .def_readwrite("prev_gen_kw", &rtd::MpcState::prev_gen_kw);

  py::class_<rtd::MpcStepResult>(m, "MpcStepResult")
      .def_readonly("target", &rtd::MpcStepResult::target)
      .def_readonly("e_anchor", &rtd::MpcStepResult::e_anchor)
      .def_readonly("soc_clamped", &rtd::MpcStepResult::soc_clamped);

  m.def("run_mpc_step", &rtd::run_mpc_step, py::arg("model"), py::arg("forecast"),
        py::arg("t"), py::arg("state"));
  m.def("tie_line_target", &rtd::tie_line_target);

  py::class_<rtc::ControlTick>(m, "ControlTick")
      .def_readonly("tick", &rtc::ControlTick::tick)
      .def_readonly("actual_netload_kw", &rtc::ControlTick::actual_netload_kw)
      .def_readonly("required_ess_kw", &rtc::ControlTick::required_ess_kw)
      .def_readonly("applied_ess_kw", &rtc::ControlTick::applied_ess_kw)
      .def_readonly("soc_after_kwh", &rtc::ControlTick::soc_after_kwh)
      .def_readonly("tie_line_kw", &rtc::ControlTick::tie_line_kw)
      .def_readonly("mitigated", &rtc::ControlTick::mitigated)
      .def_readonly("grid_limit_violated", &rtc::ControlTick::grid_limit_violated);

  py::class_<rtc::ControlTrace>(m, "ControlTrace")
      .def_readonly("interval", &rtc::ControlTrace::interval)
      .def_readonly("tie_target_kw", &rtc::ControlTrace::tie_target_kw)
      .def_readonly("ticks", &rtc::ControlTrace::ticks)
      .def_readonly("count", &rtc::ControlTrace::count);

  py::class_<rtc::RtcState>(m, "RtcState")
      .def(py::init<>())
      .def_readwrite("soc_kwh", &rtc::RtcState::soc_kwh);

  m.def("control_tick", &rtc::control_tick, py::arg("model"), py::arg("target"),
        py::arg("actual_netload_kw"), py::arg("state"), py::arg("tick_index") = 0);
  m.def(
      "run_control_interval",
      [](const MicrogridModel& model, const rtd::DispatchTarget& target,
         const std::vector<double>& netload, rtc::RtcState& state, int first_tick) {
        return rtc::run_control_interval(model, target, netload, state, first_tick);
      },
      py::arg("model"), py::arg("target"), py::arg("actual_netload_kw"), py::arg("state"),
      py::arg("first_tick_index") = 0);

  // --- metrics / engine ------------------------------------------------------
  py::class_<metrics::IntervalMetrics>(m, "IntervalMetrics")
      .def_readonly("interval", &metrics::IntervalMetrics::interval)
      .def_readonly("tie_target_kw", &metrics::IntervalMetrics::tie_target_kw)
      .def_readonly("v_with", &metrics::IntervalMetrics::v_with)
      .def_readonly("v_without", &metrics::IntervalMetrics::v_without)
      .def_readonly("fmr_with", &metrics::IntervalMetrics::fmr_with)
      .def_readonly("fmr_without", &metrics::IntervalMetrics::fmr_without)
      .def_readonly("tie_min", &metrics::IntervalMetrics::tie_min)
      .def_readonly("tie_max", &metrics::IntervalMetrics::tie_max)
      .def_readonly("count", &metrics::IntervalMetrics::count);

  py::class_<metrics::MetricsReport>(m, "MetricsReport")
      .def_readonly("intervals", &metrics::MetricsReport::intervals)
      .def_readonly("v_with_mean", &metrics::MetricsReport::v_with_mean)
      .def_readonly("v_without_mean", &metrics::MetricsReport::v_without_mean)
      .def_readonly("fmr_with_overall", &metrics::MetricsReport::fmr_with_overall)
      .def_readonly("fmr_without_overall", &metrics::MetricsReport::fmr_without_overall)
      .def_readonly("has_baseline", &metrics::MetricsReport::has_baseline);

  m.def("fmr", &metrics::fmr);
  m.def("tie_variance", &metrics::tie_variance);
  m.def("baseline_without_rtc", &metrics::baseline_without_rtc, py::arg("model"),
        py::arg("actual"), py::arg("targets"));

  py::class_<engine::RunSpec>(m, "RunSpec")
      .def(py::init<>())
      .def_readwrite("config", &engine::RunSpec::config)
      .def_readwrite("load_csv", &engine::RunSpec::load_csv)
      .def_readwrite("wind_csv", &engine::RunSpec::wind_csv)
      .def_readwrite("solar_csv", &engine::RunSpec::solar_csv)
      .def_readwrite("commitment_csv", &engine::RunSpec::commitment_csv)
      .def_readwrite("error_levels_percent", &engine::RunSpec::error_levels_percent)
      .def_readwrite("base_seed", &engine::RunSpec::base_seed)
      .def_readwrite("horizon", &engine::RunSpec::horizon)
      .def_readwrite("out_dir", &engine::RunSpec::out_dir)
      .def_readwrite("with_baseline", &engine::RunSpec::with_baseline)
      .def_readwrite("figures", &engine::RunSpec::figures);

  py::class_<engine::ScenarioRun>(m, "ScenarioRun")
      .def_readonly("error_level", &engine::ScenarioRun::error_level)
      .def_readonly("seed", &engine::ScenarioRun::seed)
      .def_readonly("actual", &engine::ScenarioRun::actual)
      .def_readonly("targets", &engine::ScenarioRun::targets)
      .def_readonly("traces_with", &engine::ScenarioRun::traces_with)
      .def_readonly("traces_without", &engine::ScenarioRun::traces_without)
      .def_readonly("report", &engine::ScenarioRun::report);

  py::class_<engine::ScenarioArtifacts>(m, "ScenarioArtifacts")
      .def_readonly("error_percent", &engine::ScenarioArtifacts::error_percent)
      .def_readonly("seed", &engine::ScenarioArtifacts::seed)
      .def_readonly("dir", &engine::ScenarioArtifacts::dir)
      .def_readonly("report", &engine::ScenarioArtifacts::report);

  py::class_<engine::RunResult>(m, "RunResult")
      .def_readonly("scenarios", &engine::RunResult::scenarios);

  m.def("simulate_scenario", &engine::simulate_scenario, py::arg("model"),
        py::arg("forecast"), py::arg("error_level"), py::arg("seed"),
        py::arg("with_baseline") = true);
  m.def("run", &engine::run, py::arg("spec"),
        py::call_guard<py::gil_scoped_release>());
  m.def("emit_figure_data", &engine::emit_figure_data, py::arg("scenario_dir"));
}
