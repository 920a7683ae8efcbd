#include "mgems/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mgems/csv.hpp"

namespace mgems::metrics {

double population_variance(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("variance of empty sample set");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) return 0.0;  // constant series, exactly zero
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double acc = 0.0;
  for (double v : samples) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(samples.size());
}

double fmr(const std::vector<rtc::ControlTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("fmr of empty trace set");
  long total = 0, mitigated = 0;
  for (const auto& trace : traces) {
    total += static_cast<long>(trace.ticks.size());
    mitigated += static_cast<long>(trace.ticks.size()) - trace.count;
  }
  if (total == 0) throw std::invalid_argument("fmr of traces with no ticks");
  return 100.0 * static_cast<double>(mitigated) / static_cast<double>(total);
}

double tie_variance(const std::vector<rtc::ControlTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("tie_variance of empty trace set");
  double acc = 0.0;
  std::vector<double> samples;
  for (const auto& trace : traces) {
    samples.clear();
    for (const auto& tick : trace.ticks) samples.push_back(tick.tie_line_kw);
    acc += population_variance(samples);
  }
  return acc / static_cast<double>(traces.size());
}

std::vector<rtc::ControlTrace> baseline_without_rtc(
    const MicrogridModel& model, const ActualSeries& actual,
    const std::vector<rtd::DispatchTarget>& targets) {
  const int ipd = intervals_per_dispatch(model);
  const size_t S = model.storage.size();
  std::vector<double> soc;
  for (const auto& ess : model.storage) soc.push_back(ess.e_initial);
  const double dt_c = model.dt_control_hours();

  std::vector<rtc::ControlTrace> traces;
  for (size_t i = 0; i < targets.size(); ++i) {
    const auto& target = targets[i];
    double fixed_gen = 0.0;
    for (double g : target.gen_kw) fixed_gen += g;
    double sched_total = 0.0;
    for (double s : target.ess_net_kw) sched_total += s;

    rtc::ControlTrace trace;
    trace.interval = target.interval;
    trace.tie_target_kw = target.tie_target_kw;
    for (int c = 0; c < ipd; ++c) {
      size_t abs_tick = i * ipd + c;
      if (abs_tick >= actual.ticks()) break;
      rtc::ControlTick tick;
      tick.tick = static_cast<int>(abs_tick);
      tick.actual_netload_kw = actual.netload_kw(abs_tick);
      tick.required_ess_kw = sched_total;
      tick.applied_ess_kw = sched_total;
      tick.tie_line_kw = tick.actual_netload_kw - fixed_gen - sched_total;
      for (size_t s = 0; s < S; ++s) soc[s] -= dt_c * target.ess_net_kw[s];
      tick.soc_after_kwh = 0.0;
      for (size_t s = 0; s < S; ++s) tick.soc_after_kwh += soc[s];
      tick.mitigated = std::abs(tick.tie_line_kw - target.tie_target_kw) <= rtc::kTieTolKw;
      tick.clamp_engaged = false;
      tick.grid_limit_violated = std::abs(tick.tie_line_kw) > model.grid.p_max + 1e-9;
      if (!tick.mitigated) ++trace.count;
      trace.ticks.push_back(tick);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

MetricsReport build_report(const std::vector<rtc::ControlTrace>& traces_with,
                           const std::vector<rtc::ControlTrace>& traces_without,
                           const std::vector<rtd::DispatchTarget>& targets) {
  if (traces_with.empty()) throw std::invalid_argument("report needs at least one trace");
  if (traces_with.size() != targets.size())
    throw std::invalid_argument("traces and targets disagree on interval count");
  MetricsReport report;
  report.has_baseline = !traces_without.empty();
  if (report.has_baseline && traces_without.size() != traces_with.size())
    throw std::invalid_argument("baseline traces disagree on interval count");

  std::vector<double> samples;
  for (size_t i = 0; i < traces_with.size(); ++i) {
    const auto& trace = traces_with[i];
    IntervalMetrics im;
    im.interval = trace.interval;
    im.tie_target_kw = targets[i].tie_target_kw;
    im.count = trace.count;
    samples.clear();
    for (const auto& tick : trace.ticks) samples.push_back(tick.tie_line_kw);
    im.v_with = population_variance(samples);
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    im.tie_min = *lo;
    im.tie_max = *hi;
    long n = static_cast<long>(trace.ticks.size());
    im.fmr_with = 100.0 * static_cast<double>(n - trace.count) / static_cast<double>(n);
    if (report.has_baseline) {
      const auto& base = traces_without[i];
      samples.clear();
      for (const auto& tick : base.ticks) samples.push_back(tick.tie_line_kw);
      im.v_without = population_variance(samples);
      long bn = static_cast<long>(base.ticks.size());
      im.fmr_without =
          100.0 * static_cast<double>(bn - base.count) / static_cast<double>(bn);
    } else {
      im.v_without = std::numeric_limits<double>::quiet_NaN();
      im.fmr_without = std::numeric_limits<double>::quiet_NaN();
    }
    report.intervals.push_back(im);
  }

  report.v_with_mean = tie_variance(traces_with);
  report.fmr_with_overall = fmr(traces_with);
  if (report.has_baseline) {
    report.v_without_mean = tie_variance(traces_without);
    report.fmr_without_overall = fmr(traces_without);
  } else {
    report.v_without_mean = std::numeric_limits<double>::quiet_NaN();
    report.fmr_without_overall = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

namespace {

std::string cell(double v) {
  return std::isnan(v) ? std::string("n/a") : csv::format_fixed(v);
}

}  // namespace

std::string format_report_text(const MetricsReport& report, double error_percent,
                               unsigned long long seed) {
  std::ostringstream out;
  char line[256];
  out << "scenario: error " << cell(error_percent) << " %, seed " << seed << "\n\n";
  std::snprintf(line, sizeof(line), "%-9s %14s %14s %12s %12s %10s %7s\n", "interval",
                "v_without", "v_with", "tie_min", "tie_max", "fmr", "count");
  out << line;
  for (const auto& im : report.intervals) {
    std::snprintf(line, sizeof(line), "%-9d %14s %14s %12s %12s %9s%% %7d\n",
                  im.interval, cell(im.v_without).c_str(), cell(im.v_with).c_str(),
                  cell(im.tie_min).c_str(), cell(im.tie_max).c_str(),
                  cell(im.fmr_with).c_str(), im.count);
    out << line;
  }
  out << "\n";
  std::snprintf(line, sizeof(line), "%-9s %14s %14s %35s%% %7s\n", "mean",
                cell(report.v_without_mean).c_str(), cell(report.v_with_mean).c_str(),
                cell(report.fmr_with_overall).c_str(), "");
  out << line;
  if (report.has_baseline)
    out << "baseline fmr: " << cell(report.fmr_without_overall) << " %\n";
  return out.str();
}

std::string format_report_structured(const MetricsReport& report, double error_percent,
                                     unsigned long long seed) {
  nlohmann::json j;
  j["error_percent"] = error_percent;
  j["seed"] = seed;
  j["v_with_mean"] = report.v_with_mean;
  j["fmr_with_overall"] = report.fmr_with_overall;
  if (report.has_baseline) {
    j["v_without_mean"] = report.v_without_mean;
    j["fmr_without_overall"] = report.fmr_without_overall;
  }
  j["intervals"] = nlohmann::json::array();
  for (const auto& im : report.intervals) {
    nlohmann::json row;
    row["interval"] = im.interval;
    row["tie_target_kw"] = im.tie_target_kw;
    row["v_with"] = im.v_with;
    row["fmr_with"] = im.fmr_with;
    row["tie_min"] = im.tie_min;
    row["tie_max"] = im.tie_max;
    row["count"] = im.count;
    if (report.has_baseline) {
      row["v_without"] = im.v_without;
      row["fmr_without"] = im.fmr_without;
    }
    j["intervals"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace mgems::metrics
