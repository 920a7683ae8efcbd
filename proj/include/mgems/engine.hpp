// End-to-end orchestration: scenario simulation over the horizon, artifact
// emission, and figure-ready CSV extraction.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgems/metrics.hpp"
#include "mgems/model.hpp"
#include "mgems/rtc.hpp"
#include "mgems/rtd.hpp"
#include "mgems/scenario.hpp"

namespace mgems::engine {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::filesystem::path config;
  std::filesystem::path load_csv;
  std::filesystem::path wind_csv;
  std::filesystem::path solar_csv;
  std::filesystem::path commitment_csv;  // optional override of the config reference
  std::vector<double> error_levels_percent{0.5, 1, 2, 3, 4, 5, 8, 10, 15, 20};
  std::uint64_t base_seed = 13;  // the shipped experiment's realization
  std::optional<std::pair<int, int>> horizon;  // [first, last) dispatch intervals
  std::filesystem::path out_dir = "out";
  bool with_baseline = true;
  bool figures = false;
};

// One dispatch step with everything needed to re-check it afterwards.
struct StepRecord {
  rtd::MpcStepResult mpc;
  std::optional<std::vector<double>> prev_gen_kw;  // ramp anchor used, if any
};

struct ScenarioRun {
  double error_level = 0.0;  // fraction, not percent
  std::uint64_t seed = 0;
  ActualSeries actual;
  std::vector<StepRecord> steps;
  std::vector<rtd::DispatchTarget> targets;
  std::vector<rtc::ControlTrace> traces_with;
  std::vector<rtc::ControlTrace> traces_without;  // empty without baseline
  metrics::MetricsReport report;
};

// Runs the forecast-refresh / dispatch / control loop over the whole horizon
// for one realized scenario, then the paired no-control counterfactual.
ScenarioRun simulate_scenario(const MicrogridModel& model, const ForecastSeries& forecast,
                              double error_level, std::uint64_t seed, bool with_baseline);

struct ScenarioArtifacts {
  double error_percent = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  metrics::MetricsReport report;
};

struct RunResult {
  std::vector<ScenarioArtifacts> scenarios;
};

// Loads all inputs, simulates one scenario per error level (seed is
// base_seed + level index) and writes per-scenario artifacts plus a
// cross-scenario summary. Deterministic: identical specs produce
// byte-identical files.
RunResult run(const RunSpec& spec);

// Writes scenario traces and reports into `dir`.
void write_scenario_artifacts(const std::filesystem::path& dir, const MicrogridModel& model,
                              const ScenarioRun& run, double error_percent);

// Derives figure-ready CSVs (storage power schedule vs applied; tie-line
// with vs without control) from the artifacts already present in `dir`.
void emit_figure_data(const std::filesystem::path& scenario_dir);

}  // namespace mgems::engine
