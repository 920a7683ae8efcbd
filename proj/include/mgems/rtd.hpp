// Multi-interval economic dispatch model and the rolling-horizon MPC step.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mgems/milp.hpp"
#include "mgems/model.hpp"
#include "mgems/scenario.hpp"

namespace mgems::rtd {

// Variable layout of one dispatch program. Continuous variables come first,
// grouped by interval, then all binaries, grouped by interval.
struct DispatchIndex {
  int n_gen = 0;
  int n_ess = 0;
  int window = 0;

  int cont_per_interval() const { return n_gen + 3 * n_ess + 2; }
  int continuous_count() const { return window * cont_per_interval(); }
  int binaries_per_interval() const { return 2 * n_ess + 2; }
  int binary_count() const { return window * binaries_per_interval(); }
  int total() const { return continuous_count() + binary_count(); }

  int pg(int t, int g) const { return t * cont_per_interval() + g; }
  int psc(int t, int s) const { return t * cont_per_interval() + n_gen + s; }
  int psd(int t, int s) const { return t * cont_per_interval() + n_gen + n_ess + s; }
  int pgb(int t) const { return t * cont_per_interval() + n_gen + 2 * n_ess; }
  int pgs(int t) const { return t * cont_per_interval() + n_gen + 2 * n_ess + 1; }
  int es(int t, int s) const { return t * cont_per_interval() + n_gen + 2 * n_ess + 2 + s; }
  int usc(int t, int s) const {
    return continuous_count() + t * binaries_per_interval() + s;
  }
  int usd(int t, int s) const {
    return continuous_count() + t * binaries_per_interval() + n_ess + s;
  }
  int ugb(int t) const {
    return continuous_count() + t * binaries_per_interval() + 2 * n_ess;
  }
  int ugs(int t) const {
    return continuous_count() + t * binaries_per_interval() + 2 * n_ess + 1;
  }
};

enum class RowFamily {
  Balance,
  EnergyRecursion,
  Reserve,
  Ramp,
  EssRate,
  EssStatus,
  GridLimit,
  GridStatus,
};

std::string row_family_name(RowFamily family);

struct RowTag {
  RowFamily family;
  int interval;  // window-relative
  int device;    // generator or storage index, -1 when not applicable
};

// Forecast, prices and commitment restricted to one MPC window.
struct WindowData {
  std::vector<double> load_kw;
  std::vector<double> injection_kw;
  std::vector<double> buy_price;
  std::vector<double> sell_price;
  std::vector<std::vector<int>> commitment;  // [t][g]

  int length() const { return static_cast<int>(load_kw.size()); }
};

WindowData slice_window(const MicrogridModel& model, const ForecastSeries& forecast,
                        int start, int length);

struct DispatchProgram {
  milp::MixedProgram mp;
  DispatchIndex idx;
  std::vector<RowTag> row_tags;  // parallel to mp.lp.rows
};

class DispatchFailure : public std::runtime_error {
 public:
  DispatchFailure(int interval, std::string family, const std::string& detail)
      : std::runtime_error("dispatch failure at interval " + std::to_string(interval) +
                           " (" + family + "): " + detail),
        interval(interval),
        family(std::move(family)) {}
  int interval;
  std::string family;
};

// Encodes the window dispatch problem: linear cost objective, power balance,
// storage energy recursion anchored at e_start, reserve, generator limits
// under commitment, symmetric ramp band, storage rate/status coupling with
// withheld capacity, withheld energy bounds, and tie-line limits with
// mutually exclusive buy/sell. `prev_gen_kw`, when present, anchors the
// first interval's ramp band to the previously implemented setpoints.
DispatchProgram build_dispatch(const MicrogridModel& model, const WindowData& window,
                               const std::vector<double>& e_start,
                               const std::optional<std::vector<double>>& prev_gen_kw);

// Window solution reshaped per interval and device.
struct DispatchSolution {
  int window_len = 0;
  std::vector<std::vector<double>> gen_kw;            // [t][g]
  std::vector<std::vector<double>> ess_charge_kw;     // [t][s]
  std::vector<std::vector<double>> ess_discharge_kw;  // [t][s]
  std::vector<std::vector<double>> ess_energy_kwh;    // [t][s]
  std::vector<double> grid_buy_kw;                    // [t]
  std::vector<double> grid_sell_kw;                   // [t]
  std::vector<std::vector<int>> charge_status;        // [t][s]
  std::vector<std::vector<int>> discharge_status;     // [t][s]
  std::vector<int> buy_status;                        // [t]
  std::vector<int> sell_status;                       // [t]
  double objective = 0.0;
  long nodes_explored = 0;
};

DispatchSolution extract_solution(const DispatchProgram& program,
                                  const milp::MipSolution& mip);

// Row-by-row recheck of every dispatch-model constraint on a solution,
// independent of the solver path. Returns human-readable violations.
std::vector<std::string> validate_solution(const MicrogridModel& model,
                                           const WindowData& window,
                                           const std::vector<double>& e_start,
                                           const std::optional<std::vector<double>>& prev_gen_kw,
                                           const DispatchSolution& sol,
                                           double tol = 1e-6);

// First-interval slice of a window solution.
struct DispatchTarget {
  int interval = 0;  // absolute dispatch interval
  std::vector<double> gen_kw;
  std::vector<double> ess_net_kw;          // per ESS, discharge positive
  std::vector<double> ess_planned_soc_kwh; // planned end-of-interval energy
  double tie_target_kw = 0.0;              // buy - sell, import positive
  double window_objective = 0.0;
  long nodes_explored = 0;
};

double tie_line_target(const DispatchTarget& target);

struct MpcState {
  std::vector<double> soc_kwh;                    // measured at the boundary
  std::optional<std::vector<double>> prev_gen_kw; // last implemented setpoints
};

struct MpcStepResult {
  DispatchTarget target;
  DispatchSolution window_solution;
  WindowData window;
  std::vector<double> e_anchor;  // SoC after clamping into the withheld band
  bool soc_clamped = false;
};

// Solves the window starting at interval t (truncated at the horizon end),
// implements the first interval and advances the state. Throws
// DispatchFailure naming the first violated constraint family when the
// window program is infeasible.
MpcStepResult run_mpc_step(const MicrogridModel& model, const ForecastSeries& forecast,
                           int t, MpcState& state);

}  // namespace mgems::rtd
