// Evaluation metrics: fluctuation mitigation rate and tie-line variance,
// plus the no-control counterfactual and report assembly.
#pragma once

#include <string>
#include <vector>

#include "mgems/rtc.hpp"
#include "mgems/scenario.hpp"

namespace mgems::metrics {

// Percent of control time the tie-line held its dispatched value.
double fmr(const std::vector<rtc::ControlTrace>& traces);

// Mean over dispatch intervals of the population variance of the 4-second
// tie-line samples within each interval.
double tie_variance(const std::vector<rtc::ControlTrace>& traces);

// Population variance (divisor n); exactly 0 for a constant sample set.
double population_variance(const std::vector<double>& samples);

// Counterfactual with a dispatch layer only: storage follows its schedule
// verbatim and the tie-line absorbs every deviation. Consumes the same
// realized series and targets as the controlled run.
std::vector<rtc::ControlTrace> baseline_without_rtc(
    const MicrogridModel& model, const ActualSeries& actual,
    const std::vector<rtd::DispatchTarget>& targets);

struct IntervalMetrics {
  int interval = 0;
  double tie_target_kw = 0.0;
  double v_with = 0.0;
  double v_without = 0.0;  // NaN when the baseline was not run
  double fmr_with = 0.0;
  double fmr_without = 0.0;
  double tie_min = 0.0;  // controlled run
  double tie_max = 0.0;
  int count = 0;
};

struct MetricsReport {
  std::vector<IntervalMetrics> intervals;
  double v_with_mean = 0.0;
  double v_without_mean = 0.0;
  double fmr_with_overall = 0.0;
  double fmr_without_overall = 0.0;
  bool has_baseline = false;
};

MetricsReport build_report(const std::vector<rtc::ControlTrace>& traces_with,
                           const std::vector<rtc::ControlTrace>& traces_without,
                           const std::vector<rtd::DispatchTarget>& targets);

// Aligned plain-text table, one line per dispatch interval plus aggregates.
std::string format_report_text(const MetricsReport& report, double error_percent,
                               unsigned long long seed);

// Machine-readable rendering of the same fields (JSON).
std::string format_report_structured(const MetricsReport& report, double error_percent,
                                     unsigned long long seed);

}  // namespace mgems::metrics
