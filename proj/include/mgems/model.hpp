// Domain types and configuration for the simulated microgrid.
#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgems {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Generator {
  std::string id;
  double p_min = 0.0;         // kW
  double p_max = 0.0;         // kW
  double ramp = 0.0;          // kW per hour
  double linear_cost = 0.0;   // currency per kWh
  double no_load_cost = 0.0;  // accepted but unused by the dispatch objective
  double startup_cost = 0.0;  // accepted but unused by the dispatch objective
};

struct EnergyStorage {
  std::string id;
  double e_min = 0.0;  // kWh
  double e_max = 0.0;  // kWh
  double p_charge_min = 0.0;     // kW
  double p_charge_max = 0.0;     // kW
  double p_discharge_min = 0.0;  // kW
  double p_discharge_max = 0.0;  // kW
  double delta_p = 0.0;    // kW withheld from dispatch, released to the control loop
  double delta_e = 0.0;    // kWh withheld from dispatch
  double e_initial = 0.0;  // kWh
};

struct GridLink {
  double p_max = 0.0;             // kW, tie-line thermal limit
  std::vector<double> buy_price;  // per dispatch interval, currency per kWh
  std::vector<double> sell_price;
};

struct MicrogridModel {
  std::vector<Generator> generators;
  std::vector<EnergyStorage> storage;
  GridLink grid;
  double reserve_fraction = 0.10;
  int dt_dispatch_s = 900;  // dispatch interval length
  int dt_control_s = 4;     // control tick length
  int window = 4;           // dispatch intervals per MPC run
  // commitment[t][g]: day-ahead on/off status, one row per dispatch interval
  std::vector<std::vector<int>> commitment;

  double dt_dispatch_hours() const { return dt_dispatch_s / 3600.0; }
  double dt_control_hours() const { return dt_control_s / 3600.0; }
  int generator_index(const std::string& id) const;  // -1 if unknown
};

// Maps a series reference from the config (e.g. "prices.csv") to its text.
using SeriesResolver = std::function<std::string(const std::string&)>;

// Parses and validates a model. References to external series are resolved
// through `resolver`; inline [prices] / [commitment] sections need none.
// Throws ConfigError naming the offending key, field or interval.
MicrogridModel load_model(const std::string& config_text,
                          const SeriesResolver& resolver = nullptr);

// Convenience wrapper: series references resolve relative to the config file.
MicrogridModel load_model_file(const std::filesystem::path& path);

// Emits a self-contained config (prices and commitment inline) that reloads
// to a field-identical model.
std::string serialize_model(const MicrogridModel& model);

// Throws ConfigError on the first violated type invariant.
void validate_model(const MicrogridModel& model);

// Replaces the commitment schedule with one parsed from CSV text
// (`interval_index, generator_id, status`); re-validates the model.
void replace_commitment(MicrogridModel& model, const std::string& csv_text);

// dt_dispatch / dt_control, exact (divisibility is enforced at load).
int intervals_per_dispatch(const MicrogridModel& model);

}  // namespace mgems
