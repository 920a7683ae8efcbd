// Acceptance suite for the shipped default microgrid. Prints one line per
// criterion and exits nonzero if any fails.
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mgems/engine.hpp"
#include "mgems/metrics.hpp"
#include "mgems/model.hpp"
#include "mgems/rtc.hpp"
#include "mgems/rtd.hpp"
#include "mgems/scenario.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mgems;

namespace {

struct Gate {
  int failures = 0;
  void criterion(int number, const std::string& name, bool ok, const std::string& detail) {
    std::printf("criterion %d (%s): %s%s%s\n", number, name.c_str(),
                ok ? "PASS" : "FAIL", detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TimedRun {
  engine::ScenarioRun run;
  double seconds = 0.0;
};

TimedRun timed_scenario(const MicrogridModel& model, const ForecastSeries& forecast,
                        double pct, std::uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  TimedRun out{engine::simulate_scenario(model, forecast, pct / 100.0, seed, true), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// Criterion 6 helper: every dispatch-model equation on every window solution,
// exact balance and full energy bounds on every control tick.
std::string check_invariants(const MicrogridModel& model, const engine::ScenarioRun& run) {
  for (const auto& step : run.steps) {
    auto violations = rtd::validate_solution(model, step.mpc.window, step.mpc.e_anchor,
                                             step.prev_gen_kw, step.mpc.window_solution);
    if (!violations.empty())
      return "window at interval " + std::to_string(step.mpc.target.interval) + ": " +
             violations.front();
  }
  const auto& ess = model.storage[0];
  for (size_t i = 0; i < run.traces_with.size(); ++i) {
    const auto& target = run.targets[i];
    double gen_sum = 0.0;
    for (double g : target.gen_kw) gen_sum += g;
    for (const auto& tick : run.traces_with[i].ticks) {
      double residual =
          tick.tie_line_kw + gen_sum + tick.applied_ess_kw - tick.actual_netload_kw;
      if (std::abs(residual) > 1e-9)
        return "tick " + std::to_string(tick.tick) + ": balance residual " +
               std::to_string(residual);
      if (tick.soc_after_kwh < ess.e_min - 1e-9 || tick.soc_after_kwh > ess.e_max + 1e-9)
        return "tick " + std::to_string(tick.tick) + ": SoC outside full bounds";
      if (std::min(std::abs(tick.applied_ess_kw), 0.0) > 0) return "unreachable";
    }
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance_tests <default-config-dir>\n");
    return 2;
  }
  fs::path data_dir = argv[1];
  Gate gate;

  MicrogridModel model = load_model_file(data_dir / "config.ini");
  ForecastSeries forecast = make_forecast(load_series(slurp(data_dir / "load.csv")),
                                          load_series(slurp(data_dir / "wind.csv")),
                                          load_series(slurp(data_dir / "solar.csv")));

  // The shipped experiment: default error levels, seed = default base + index.
  const engine::RunSpec defaults;
  const std::vector<double>& table_levels = defaults.error_levels_percent;
  std::vector<TimedRun> runs;
  runs.reserve(table_levels.size());
  for (size_t i = 0; i < table_levels.size(); ++i)
    runs.push_back(timed_scenario(model, forecast, table_levels[i], defaults.base_seed + i));

  // --- 1: low-error regime ---------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    double prev_v = 0.0;
    for (size_t i = 0; i < 6; ++i) {  // 0.5 .. 5 percent
      const auto& r = runs[i].run;
      if (!(r.report.v_with_mean == 0.0 && r.report.fmr_with_overall == 100.0)) {
        ok = false;
        detail = "level " + std::to_string(table_levels[i]) + "%: v_with " +
                 std::to_string(r.report.v_with_mean) + ", fmr " +
                 std::to_string(r.report.fmr_with_overall);
        break;
      }
      if (!(r.report.v_without_mean > 0.0) || !(r.report.v_without_mean > prev_v)) {
        ok = false;
        detail = "baseline variance not strictly increasing at level " +
                 std::to_string(table_levels[i]) + "%";
        break;
      }
      prev_v = r.report.v_without_mean;
      if (runs[i].seconds >= 10.0) {
        ok = false;
        detail = "scenario runtime " + std::to_string(runs[i].seconds) + " s";
        break;
      }
    }
    gate.criterion(1, "low-error regime", ok, detail);
  }

  // --- 2: high-error regime ---------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (size_t i : {7, 8, 9}) {  // 10, 15, 20 percent
      const auto& r = runs[i].run;
      if (!(r.report.fmr_with_overall < 100.0 && r.report.v_with_mean > 0.0 &&
            r.report.v_with_mean < r.report.v_without_mean)) {
        ok = false;
        detail = "level " + std::to_string(table_levels[i]) + "%: fmr " +
                 std::to_string(r.report.fmr_with_overall) + ", v_with " +
                 std::to_string(r.report.v_with_mean) + ", v_without " +
                 std::to_string(r.report.v_without_mean);
        break;
      }
    }
    gate.criterion(2, "high-error regime", ok, detail);
  }

  // --- 3: per-interval report shape at 10% ------------------------------------
  {
    bool ok = true;
    std::string detail;
    const auto& report = runs[7].run.report;
    for (const auto& im : report.intervals) {
      bool flat = im.tie_min == im.tie_max;
      if (im.count == 0 && !(flat && im.fmr_with == 100.0 &&
                             std::abs(im.tie_min - im.tie_target_kw) <= rtc::kTieTolKw)) {
        ok = false;
        detail = "interval " + std::to_string(im.interval) + " mitigated but not flat";
        break;
      }
      if (im.count > 0 && !(im.tie_min < im.tie_max)) {
        ok = false;
        detail = "interval " + std::to_string(im.interval) + " clipped but min == max";
        break;
      }
    }
    gate.criterion(3, "per-interval shape at 10%", ok, detail);
  }

  // --- 4: mitigation-rate arithmetic ------------------------------------------
  {
    rtc::ControlTrace trace;
    trace.interval = 0;
    for (int c = 0; c < 225; ++c) {
      rtc::ControlTick tick;
      tick.tie_line_kw = c < 16 ? 739.0 : 713.0;
      tick.mitigated = c >= 16;
      if (!tick.mitigated) ++trace.count;
      trace.ticks.push_back(tick);
    }
    double value = metrics::fmr({trace});
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    gate.criterion(4, "fmr arithmetic", std::string(buf) == "92.89",
                   "16 of 225 clipped prints as " + std::string(buf));
  }

  // --- 5: solver oracle equivalence --------------------------------------------
  {
    bool ok = true;
    std::string detail;
    int checked_lp = 0;
    for (std::uint64_t seed = 1; seed <= 200 && ok; ++seed) {
      lp::LinearProgram prog = oracles::random_bounded_lp(seed, 6, 4);
      lp::LpSolution sol = lp::solve_lp(prog);
      oracles::LpOptimum oracle = oracles::enumerate_lp_optimum(prog);
      if (oracle.feasible != (sol.status == lp::LpStatus::Optimal)) {
        ok = false;
        detail = "lp seed " + std::to_string(seed) + ": status mismatch";
        break;
      }
      if (oracle.feasible) {
        double scale = std::max(1.0, std::abs(oracle.objective));
        if (std::abs(sol.objective_value - oracle.objective) / scale > 1e-6) {
          ok = false;
          detail = "lp seed " + std::to_string(seed) + ": objective mismatch";
          break;
        }
      }
      ++checked_lp;
    }

    std::atomic<int> mip_failures{0};
    std::vector<std::string> mip_details(200);
    if (ok) {
      const int total = 200;
      unsigned workers = std::max(1u, std::thread::hardware_concurrency());
      std::atomic<int> next{0};
      auto worker = [&]() {
        for (int k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
          oracles::RandomDispatchInstance inst =
              oracles::random_dispatch_instance(1000 + k);
          milp::MipSolution mip = milp::solve_mip(inst.program.mp);
          oracles::MipOptimum oracle = oracles::enumerate_mip_optimum(inst.program.mp);
          bool good;
          if (oracle.feasible != (mip.status == milp::MipStatus::Optimal)) {
            good = false;
          } else if (oracle.feasible) {
            double scale = std::max(1.0, std::abs(oracle.objective));
            good = std::abs(mip.objective_value - oracle.objective) / scale <= 1e-6;
          } else {
            good = true;
          }
          if (!good) {
            mip_details[k] = "dispatch instance " + std::to_string(1000 + k) +
                             ": solver and enumeration disagree";
            ++mip_failures;
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
      if (mip_failures > 0) {
        ok = false;
        for (const auto& d : mip_details)
          if (!d.empty()) { detail = d; break; }
      }
    }
    gate.criterion(5, "solver oracle equivalence", ok,
                   ok ? "200 lps + 200 window mips" : detail);
  }

  // --- 6: invariant suite --------------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (const auto& timed : runs) {
      detail = check_invariants(model, timed.run);
      if (!detail.empty()) { ok = false; break; }
    }
    gate.criterion(6, "invariant suite", ok, detail);
  }

  // --- 7: zero-error identity ------------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    engine::ScenarioRun zero = engine::simulate_scenario(model, forecast, 0.0, 1, true);
    if (!(zero.report.fmr_with_overall == 100.0 && zero.report.fmr_without_overall == 100.0 &&
          zero.report.v_with_mean == 0.0 && zero.report.v_without_mean == 0.0)) {
      ok = false;
      detail = "zero-error metrics are not degenerate";
    }
    for (size_t i = 0; i < zero.traces_with.size() && ok; ++i) {
      const auto& target = zero.targets[i];
      for (const auto& tick : zero.traces_with[i].ticks) {
        if (tick.tie_line_kw != target.tie_target_kw) {
          ok = false;
          detail = "tie deviates at tick " + std::to_string(tick.tick);
          break;
        }
        if (std::abs(tick.applied_ess_kw - target.ess_net_kw[0]) > 1e-6) {
          ok = false;
          detail = "storage deviates from schedule at tick " + std::to_string(tick.tick);
          break;
        }
      }
    }
    if (ok) {
      double final_soc = zero.traces_with.back().ticks.back().soc_after_kwh;
      double planned = zero.targets.back().ess_planned_soc_kwh[0];
      if (std::abs(final_soc - planned) > 1e-6) {
        ok = false;
        detail = "final SoC " + std::to_string(final_soc) + " vs plan " +
                 std::to_string(planned);
      }
    }
    gate.criterion(7, "zero-error identity", ok, detail);
  }

  // --- 8: byte-identical reruns -------------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    fs::path tmp = fs::temp_directory_path() / "mgems_acceptance_determinism";
    fs::remove_all(tmp);
    engine::RunSpec spec;
    spec.config = data_dir / "config.ini";
    spec.load_csv = data_dir / "load.csv";
    spec.wind_csv = data_dir / "wind.csv";
    spec.solar_csv = data_dir / "solar.csv";
    spec.error_levels_percent = {0.5, 10};
    spec.figures = true;
    spec.out_dir = tmp / "a";
    engine::RunResult first = engine::run(spec);
    spec.out_dir = tmp / "b";
    engine::RunResult second = engine::run(spec);
    for (size_t i = 0; i < first.scenarios.size() && ok; ++i) {
      for (const char* name :
           {"ticks.csv", "baseline_ticks.csv", "dispatch.csv", "windows.csv",
            "report.txt", "report.structured", "ess_power.csv", "tie_line.csv"}) {
        if (slurp(first.scenarios[i].dir / name) != slurp(second.scenarios[i].dir / name)) {
          ok = false;
          detail = std::string(name) + " differs between identical runs";
          break;
        }
      }
    }
    if (ok && slurp(tmp / "a" / "summary.txt") != slurp(tmp / "b" / "summary.txt")) {
      ok = false;
      detail = "summary.txt differs";
    }
    fs::remove_all(tmp);
    gate.criterion(8, "determinism", ok, detail);
  }

  if (gate.failures == 0) std::printf("all criteria passed\n");
  return gate.failures;
}
