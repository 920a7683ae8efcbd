#include "mgems/engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mgems/csv.hpp"

namespace mgems::engine {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw EngineError(std::string(what) + ": cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EngineError("cannot write " + path.string());
  out << body;
}

std::string format_percent_label(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", pct);
  return buf;
}

std::string ticks_csv(const std::vector<rtc::ControlTrace>& traces) {
  std::ostringstream out;
  out << "tick,actual_netload_kw,ess_power_kw,soc_kwh,tie_line_kw,mitigated\n";
  for (const auto& trace : traces) {
    for (const auto& tick : trace.ticks) {
      out << tick.tick << ',' << csv::format_fixed(tick.actual_netload_kw) << ','
          << csv::format_fixed(tick.applied_ess_kw) << ','
          << csv::format_fixed(tick.soc_after_kwh) << ','
          << csv::format_fixed(tick.tie_line_kw) << ',' << (tick.mitigated ? 1 : 0)
          << '\n';
    }
  }
  return out.str();
}

std::string dispatch_csv(const MicrogridModel& model, const ScenarioRun& run) {
  std::ostringstream out;
  out << "interval,device_id,setpoint_kw,status\n";
  for (size_t i = 0; i < run.targets.size(); ++i) {
    const auto& target = run.targets[i];
    const auto& sol = run.steps[i].mpc.window_solution;
    for (size_t g = 0; g < model.generators.size(); ++g)
      out << target.interval << ',' << model.generators[g].id << ','
          << csv::format_fixed(target.gen_kw[g]) << ','
          << model.commitment[target.interval][g] << '\n';
    for (size_t s = 0; s < model.storage.size(); ++s)
      out << target.interval << ',' << model.storage[s].id << ','
          << csv::format_fixed(target.ess_net_kw[s]) << ','
          << sol.discharge_status[0][s] - sol.charge_status[0][s] << '\n';
    out << target.interval << ",grid," << csv::format_fixed(target.tie_target_kw) << ','
        << sol.buy_status[0] - sol.sell_status[0] << '\n';
  }
  return out.str();
}

std::string windows_csv(const ScenarioRun& run) {
  std::ostringstream out;
  out << "interval,window_len,objective,nodes_explored,ess_scheduled_kw,"
         "soc_anchor_kwh,soc_clamped\n";
  for (const auto& step : run.steps) {
    double anchor = 0.0;
    for (double e : step.mpc.e_anchor) anchor += e;
    double sched = 0.0;
    for (double p : step.mpc.target.ess_net_kw) sched += p;
    out << step.mpc.target.interval << ',' << step.mpc.window_solution.window_len << ','
        << csv::format_fixed(step.mpc.target.window_objective) << ','
        << step.mpc.target.nodes_explored << ',' << csv::format_fixed(sched) << ','
        << csv::format_fixed(anchor) << ',' << (step.mpc.soc_clamped ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace

ScenarioRun simulate_scenario(const MicrogridModel& model, const ForecastSeries& forecast,
                              double error_level, std::uint64_t seed, bool with_baseline) {
  const int horizon = static_cast<int>(forecast.horizon());
  if (horizon == 0) throw EngineError("empty forecast horizon");
  if (static_cast<int>(model.commitment.size()) < horizon)
    throw EngineError("commitment schedule: missing interval " +
                      std::to_string(model.commitment.size()));
  if (static_cast<int>(model.grid.buy_price.size()) < horizon)
    throw EngineError("price series: missing interval " +
                      std::to_string(model.grid.buy_price.size()));

  ScenarioRun run;
  run.error_level = error_level;
  run.seed = seed;
  run.actual = generate_actual(forecast, error_level, seed, model);

  const int ipd = intervals_per_dispatch(model);
  rtd::MpcState mpc_state;
  rtc::RtcState rtc_state;
  for (const auto& ess : model.storage) {
    mpc_state.soc_kwh.push_back(ess.e_initial);
    rtc_state.soc_kwh.push_back(ess.e_initial);
  }

  std::vector<double> netload_ticks;
  for (int t = 0; t < horizon; ++t) {
    mpc_state.soc_kwh = rtc_state.soc_kwh;
    StepRecord record;
    record.prev_gen_kw = mpc_state.prev_gen_kw;
    record.mpc = rtd::run_mpc_step(model, forecast, t, mpc_state);
    run.targets.push_back(record.mpc.target);

    netload_ticks.clear();
    for (int c = 0; c < ipd; ++c)
      netload_ticks.push_back(run.actual.netload_kw(static_cast<size_t>(t) * ipd + c));
    run.traces_with.push_back(rtc::run_control_interval(
        model, record.mpc.target, netload_ticks, rtc_state, t * ipd));
    run.steps.push_back(std::move(record));
  }

  if (with_baseline)
    run.traces_without = metrics::baseline_without_rtc(model, run.actual, run.targets);
  run.report = metrics::build_report(run.traces_with, run.traces_without, run.targets);
  return run;
}

void write_scenario_artifacts(const fs::path& dir, const MicrogridModel& model,
                              const ScenarioRun& run, double error_percent) {
  fs::create_directories(dir);
  write_file(dir / "ticks.csv", ticks_csv(run.traces_with));
  if (!run.traces_without.empty())
    write_file(dir / "baseline_ticks.csv", ticks_csv(run.traces_without));
  write_file(dir / "dispatch.csv", dispatch_csv(model, run));
  write_file(dir / "windows.csv", windows_csv(run));
  write_file(dir / "report.txt",
             metrics::format_report_text(run.report, error_percent, run.seed));
  write_file(dir / "report.structured",
             metrics::format_report_structured(run.report, error_percent, run.seed));
}

RunResult run(const RunSpec& spec) {
  MicrogridModel model = load_model_file(spec.config);
  if (!spec.commitment_csv.empty())
    replace_commitment(model, read_file(spec.commitment_csv, "commitment"));

  ForecastSeries forecast = make_forecast(
      load_series(read_file(spec.load_csv, "load series")),
      load_series(read_file(spec.wind_csv, "wind series")),
      load_series(read_file(spec.solar_csv, "solar series")));

  if (spec.horizon) {
    auto [first, last] = *spec.horizon;
    if (first < 0 || last <= first || last > static_cast<int>(forecast.horizon()))
      throw EngineError("horizon range [" + std::to_string(first) + "," +
                        std::to_string(last) + ") is empty or outside the series");
    if (last > static_cast<int>(model.commitment.size()) ||
        last > static_cast<int>(model.grid.buy_price.size()))
      throw EngineError("horizon extends past the price or commitment series");
    auto slice = [&](std::vector<double>& v) {
      v = std::vector<double>(v.begin() + first, v.begin() + last);
    };
    slice(forecast.load_kw);
    slice(forecast.wind_kw);
    slice(forecast.solar_kw);
    slice(model.grid.buy_price);
    slice(model.grid.sell_price);
    model.commitment = std::vector<std::vector<int>>(model.commitment.begin() + first,
                                                     model.commitment.begin() + last);
  }
  if (spec.error_levels_percent.empty()) throw EngineError("no error levels given");
  for (double pct : spec.error_levels_percent)
    if (pct < 0.0) throw EngineError("error levels must be >= 0");

  RunResult result;
  fs::create_directories(spec.out_dir);
  for (size_t i = 0; i < spec.error_levels_percent.size(); ++i) {
    double pct = spec.error_levels_percent[i];
    std::uint64_t seed = spec.base_seed + i;  // scenario seed rule
    ScenarioRun scenario =
        simulate_scenario(model, forecast, pct / 100.0, seed, spec.with_baseline);
    fs::path dir = spec.out_dir / ("scenario_err" + format_percent_label(pct) +
                                   "_seed" + std::to_string(seed));
    write_scenario_artifacts(dir, model, scenario, pct);
    if (spec.figures) emit_figure_data(dir);
    result.scenarios.push_back(
        ScenarioArtifacts{pct, seed, dir, std::move(scenario.report)});
  }

  std::ostringstream text;
  char line[160];
  auto cell = [](double v) {
    return std::isnan(v) ? std::string("n/a") : csv::format_fixed(v);
  };
  std::snprintf(line, sizeof(line), "%-8s %14s %12s %14s %12s\n", "error%",
                "v_without", "fmr_without", "v_with", "fmr_with");
  text << line;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& sc : result.scenarios) {
    std::snprintf(line, sizeof(line), "%-8s %14s %12s %14s %12s\n",
                  format_percent_label(sc.error_percent).c_str(),
                  cell(sc.report.v_without_mean).c_str(),
                  cell(sc.report.fmr_without_overall).c_str(),
                  cell(sc.report.v_with_mean).c_str(),
                  cell(sc.report.fmr_with_overall).c_str());
    text << line;
    nlohmann::json row;
    row["error_percent"] = sc.error_percent;
    row["seed"] = sc.seed;
    row["v_with"] = sc.report.v_with_mean;
    row["fmr_with"] = sc.report.fmr_with_overall;
    if (sc.report.has_baseline) {
      row["v_without"] = sc.report.v_without_mean;
      row["fmr_without"] = sc.report.fmr_without_overall;
    }
    summary.push_back(row);
  }
  write_file(spec.out_dir / "summary.txt", text.str());
  write_file(spec.out_dir / "summary.structured", summary.dump(2) + "\n");
  return result;
}

void emit_figure_data(const fs::path& dir) {
  auto require = [&dir](const char* name) {
    fs::path p = dir / name;
    if (!fs::exists(p)) throw EngineError("missing artifact: " + p.string());
    return read_file(p, "figure data");
  };
  auto tick_rows = csv::lines(require("ticks.csv"));
  auto window_rows = csv::lines(require("windows.csv"));
  if (tick_rows.size() <= 1) throw EngineError("ticks.csv: empty trace");
  if (window_rows.size() <= 1) throw EngineError("windows.csv: empty log");

  // Net scheduled storage power per implemented interval.
  std::vector<double> sched;
  for (size_t i = 1; i < window_rows.size(); ++i) {
    auto f = csv::fields(window_rows[i]);
    if (f.size() != 7) throw EngineError("windows.csv: malformed row: " + window_rows[i]);
    sched.push_back(csv::parse_double(f[4], "windows.csv ess_scheduled_kw"));
  }
  size_t n_ticks = tick_rows.size() - 1;
  if (n_ticks % sched.size() != 0)
    throw EngineError("ticks.csv and windows.csv disagree on interval count");
  size_t ipd = n_ticks / sched.size();

  bool have_baseline = fs::exists(dir / "baseline_ticks.csv");
  std::vector<std::string> base_rows;
  if (have_baseline)
    base_rows = csv::lines(read_file(dir / "baseline_ticks.csv", "figure data"));

  std::ostringstream ess_out, tie_out;
  ess_out << "tick,scheduled_kw,applied_kw\n";
  tie_out << (have_baseline ? "tick,with_rtc_kw,without_rtc_kw\n" : "tick,with_rtc_kw\n");
  for (size_t i = 1; i < tick_rows.size(); ++i) {
    auto f = csv::fields(tick_rows[i]);
    if (f.size() != 6) throw EngineError("ticks.csv: malformed row: " + tick_rows[i]);
    size_t interval = (i - 1) / ipd;
    ess_out << f[0] << ',' << csv::format_fixed(sched[interval]) << ',' << f[2] << '\n';
    tie_out << f[0] << ',' << f[4];
    if (have_baseline) {
      if (i >= base_rows.size())
        throw EngineError("baseline_ticks.csv shorter than ticks.csv");
      tie_out << ',' << csv::fields(base_rows[i])[4];
    }
    tie_out << '\n';
  }
  write_file(dir / "ess_power.csv", ess_out.str());
  write_file(dir / "tie_line.csv", tie_out.str());
}

}  // namespace mgems::engine
