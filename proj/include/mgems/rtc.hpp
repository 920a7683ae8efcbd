// 4-second control loop: hold the tie-line at the dispatched target by
// modulating storage power inside its released (full) limits, falling back
// to the grid for whatever the storage cannot absorb.
#pragma once

#include <span>
#include <vector>

#include "mgems/model.hpp"
#include "mgems/rtd.hpp"

namespace mgems::rtc {

// Tie-line deviations at or below this are treated as fully mitigated.
inline constexpr double kTieTolKw = 1e-3;

struct ControlTick {
  int tick = 0;  // absolute control tick
  double actual_netload_kw = 0.0;
  double required_ess_kw = 0.0;  // net power needed to hold the target, discharge positive
  double applied_ess_kw = 0.0;   // net power after rate and energy clamping
  double soc_after_kwh = 0.0;    // aggregate over units
  double tie_line_kw = 0.0;
  bool mitigated = false;
  bool clamp_engaged = false;        // a rate or energy limit bound this tick
  bool grid_limit_violated = false;  // fallback pushed |tie| past the line limit
};

struct ControlTrace {
  int interval = 0;        // dispatch interval the ticks belong to
  double tie_target_kw = 0.0;
  std::vector<ControlTick> ticks;
  int count = 0;  // ticks the storage could not fully mitigate
};

struct RtcState {
  std::vector<double> soc_kwh;  // per storage unit
};

// One control tick. Required net storage power is allocated across units
// (proportionally to headroom in the needed direction), clamped first to the
// full rate limits and then so the post-tick energy stays inside the full
// energy band; the tie-line absorbs any residual.
ControlTick control_tick(const MicrogridModel& model, const rtd::DispatchTarget& target,
                         double actual_netload_kw, RtcState& state, int tick_index);

// Folds control_tick over one dispatch interval worth of realized net-load.
ControlTrace run_control_interval(const MicrogridModel& model,
                                  const rtd::DispatchTarget& target,
                                  std::span<const double> actual_netload_kw,
                                  RtcState& state, int first_tick_index = 0);

}  // namespace mgems::rtc
