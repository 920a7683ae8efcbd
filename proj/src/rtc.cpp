#include "mgems/rtc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgems::rtc {

ControlTick control_tick(const MicrogridModel& model, const rtd::DispatchTarget& target,
                         double actual_netload_kw, RtcState& state, int tick_index) {
  const size_t S = model.storage.size();
  if (state.soc_kwh.size() != S)
    throw std::invalid_argument("control state must track one SoC per storage unit");
  const double dt_c = model.dt_control_hours();

  double fixed_gen = 0.0;
  for (double g : target.gen_kw) fixed_gen += g;

  // Net storage power that keeps the tie-line at its dispatched value.
  const double p_req = actual_netload_kw - fixed_gen - target.tie_target_kw;

  // Allocate the deviation from the scheduled baseline across units,
  // proportionally to rate headroom in the needed direction.
  double sched_total = 0.0;
  for (double s : target.ess_net_kw) sched_total += s;
  const double deviation = p_req - sched_total;
  std::vector<double> raw(S, 0.0);
  double headroom_total = 0.0;
  std::vector<double> headroom(S, 0.0);
  for (size_t s = 0; s < S; ++s) {
    const auto& ess = model.storage[s];
    headroom[s] = deviation >= 0.0 ? ess.p_discharge_max - target.ess_net_kw[s]
                                   : ess.p_charge_max + target.ess_net_kw[s];
    headroom[s] = std::max(0.0, headroom[s]);
    headroom_total += headroom[s];
  }
  for (size_t s = 0; s < S; ++s) {
    double share = headroom_total > 0.0 ? deviation * headroom[s] / headroom_total : 0.0;
    raw[s] = target.ess_net_kw[s] + share;
  }

  bool any_altered = false;
  double applied_total = 0.0;
  for (size_t s = 0; s < S; ++s) {
    const auto& ess = model.storage[s];
    // Stage (a): full rate limits, withholding released.
    double p = std::clamp(raw[s], -ess.p_charge_max, ess.p_discharge_max);
    if (p > 0.0 && p < ess.p_discharge_min) p = 0.0;
    if (p < 0.0 && -p < ess.p_charge_min) p = 0.0;
    // Stage (b): project the post-tick energy onto the full band; when a
    // bound would be crossed, the power is cut so the SoC lands exactly on it.
    double soc_next = state.soc_kwh[s] - dt_c * p;
    bool on_bound = false;
    double bound = 0.0;
    if (soc_next < ess.e_min) {
      p = (state.soc_kwh[s] - ess.e_min) / dt_c;
      on_bound = true;
      bound = ess.e_min;
    } else if (soc_next > ess.e_max) {
      p = (state.soc_kwh[s] - ess.e_max) / dt_c;
      on_bound = true;
      bound = ess.e_max;
    }
    if (p != raw[s]) any_altered = true;
    state.soc_kwh[s] = on_bound ? bound : state.soc_kwh[s] - dt_c * p;
    applied_total += p;
  }

  ControlTick tick;
  tick.tick = tick_index;
  tick.actual_netload_kw = actual_netload_kw;
  tick.required_ess_kw = p_req;
  if (!any_altered) {
    // No limit bound: the storage absorbs the whole deviation and the
    // tie-line holds its dispatched value exactly.
    tick.applied_ess_kw = p_req;
    tick.tie_line_kw = target.tie_target_kw;
  } else {
    tick.applied_ess_kw = applied_total;
    tick.tie_line_kw = actual_netload_kw - fixed_gen - applied_total;
  }
  tick.soc_after_kwh = std::accumulate(state.soc_kwh.begin(), state.soc_kwh.end(), 0.0);
  tick.mitigated = std::abs(tick.tie_line_kw - target.tie_target_kw) <= kTieTolKw;
  tick.clamp_engaged = std::abs(tick.applied_ess_kw - p_req) > kTieTolKw;
  tick.grid_limit_violated = std::abs(tick.tie_line_kw) > model.grid.p_max + 1e-9;
  return tick;
}

ControlTrace run_control_interval(const MicrogridModel& model,
                                  const rtd::DispatchTarget& target,
                                  std::span<const double> actual_netload_kw,
                                  RtcState& state, int first_tick_index) {
  ControlTrace trace;
  trace.interval = target.interval;
  trace.tie_target_kw = target.tie_target_kw;
  trace.ticks.reserve(actual_netload_kw.size());
  for (size_t c = 0; c < actual_netload_kw.size(); ++c) {
    ControlTick tick = control_tick(model, target, actual_netload_kw[c], state,
                                    first_tick_index + static_cast<int>(c));
    if (!tick.mitigated) ++trace.count;
    trace.ticks.push_back(tick);
  }
  return trace;
}

}  // namespace mgems::rtc
