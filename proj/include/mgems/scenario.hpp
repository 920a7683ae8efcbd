// Forecast and actual time series, including the synthetic forecast-error model.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgems/model.hpp"

namespace mgems {

// Per-dispatch-interval forecast. Wind and solar may arrive pre-aggregated,
// in which case one of the two vectors is all zeros; the dispatch model only
// sees their sum (the uncontrollable injection).
struct ForecastSeries {
  std::vector<double> load_kw;
  std::vector<double> wind_kw;
  std::vector<double> solar_kw;

  size_t horizon() const { return load_kw.size(); }
  double injection_kw(size_t t) const { return wind_kw[t] + solar_kw[t]; }
  double netload_kw(size_t t) const { return load_kw[t] - wind_kw[t] - solar_kw[t]; }
};

// Per-control-tick realized values.
struct ActualSeries {
  std::vector<double> load_kw;
  std::vector<double> wind_kw;
  std::vector<double> solar_kw;

  size_t ticks() const { return load_kw.size(); }
  double netload_kw(size_t c) const { return load_kw[c] - wind_kw[c] - solar_kw[c]; }
};

struct Scenario {
  ForecastSeries forecast;
  ActualSeries actual;
  double error_level = 0.0;  // amplitude bound on the multiplicative factor
  std::uint64_t seed = 0;
};

// load - wind - solar; may be negative.
double net_load(double load_kw, double wind_kw, double solar_kw);

// Applies a seeded, clamped random-walk multiplicative factor to every
// component at control resolution. The same factor drives load, wind and
// solar in a tick, so the relative net-load deviation is bounded by
// error_level exactly. error_level = 0 reproduces the forecast verbatim.
ActualSeries generate_actual(const ForecastSeries& forecast, double error_level,
                             std::uint64_t seed, const MicrogridModel& model);

// Parses a `index, value_kw` CSV into a series. Indices must be contiguous
// from 0; values must be nonnegative. Throws csv::CsvError otherwise.
std::vector<double> load_series(const std::string& csv_text);

// Assembles a forecast from equally long load/wind/solar series.
ForecastSeries make_forecast(std::vector<double> load_kw, std::vector<double> wind_kw,
                             std::vector<double> solar_kw);

// Largest |actual - forecast| / max(|forecast|, 1 kW) over all ticks,
// evaluated on net-load. Test hook for the generator's amplitude bound.
double max_relative_netload_deviation(const ForecastSeries& forecast,
                                      const ActualSeries& actual,
                                      int ticks_per_interval);

}  // namespace mgems
