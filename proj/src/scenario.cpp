#include "mgems/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mgems/csv.hpp"

namespace mgems {

double net_load(double load_kw, double wind_kw, double solar_kw) {
  return load_kw - wind_kw - solar_kw;
}

ActualSeries generate_actual(const ForecastSeries& forecast, double error_level,
                             std::uint64_t seed, const MicrogridModel& model) {
  if (error_level < 0.0)
    throw std::invalid_argument("error_level must be >= 0");
  const int ipd = intervals_per_dispatch(model);
  const size_t horizon = forecast.horizon();
  ActualSeries actual;
  actual.load_kw.reserve(horizon * ipd);
  actual.wind_kw.reserve(horizon * ipd);
  actual.solar_kw.reserve(horizon * ipd);

  // Clamped random walk on the multiplicative factor. Uniform bits are mapped
  // to [0,1) explicitly so the stream depends only on mt19937_64.
  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const double step = error_level / 30.0;
  double eps = 0.0;
  for (size_t t = 0; t < horizon; ++t) {
    for (int c = 0; c < ipd; ++c) {
      eps += (2.0 * uniform01() - 1.0) * step;
      eps = std::clamp(eps, -error_level, error_level);
      actual.load_kw.push_back(forecast.load_kw[t] * (1.0 + eps));
      actual.wind_kw.push_back(forecast.wind_kw[t] * (1.0 + eps));
      actual.solar_kw.push_back(forecast.solar_kw[t] * (1.0 + eps));
    }
  }
  return actual;
}

std::vector<double> load_series(const std::string& csv_text) {
  auto ls = csv::lines(csv_text);
  size_t i = !ls.empty() && csv::is_header(ls[0]) ? 1 : 0;
  std::vector<double> out;
  long expect = 0;
  for (; i < ls.size(); ++i) {
    auto f = csv::fields(ls[i]);
    if (f.size() != 2)
      throw csv::CsvError("series: expected 2 columns, got " +
                          std::to_string(f.size()) + " in: " + ls[i]);
    long idx = csv::parse_long(f[0], "series index");
    if (idx != expect)
      throw csv::CsvError("series: missing index " + std::to_string(expect) +
                          " (found " + std::to_string(idx) + ")");
    double v = csv::parse_double(f[1], "series value");
    if (v < 0.0)
      throw csv::CsvError("series: negative power value " + f[1] + " at index " + f[0]);
    out.push_back(v);
    ++expect;
  }
  if (out.empty()) throw csv::CsvError("series: empty series");
  return out;
}

ForecastSeries make_forecast(std::vector<double> load_kw, std::vector<double> wind_kw,
                             std::vector<double> solar_kw) {
  if (load_kw.size() != wind_kw.size() || load_kw.size() != solar_kw.size())
    throw csv::CsvError("forecast series lengths differ: load " +
                        std::to_string(load_kw.size()) + ", wind " +
                        std::to_string(wind_kw.size()) + ", solar " +
                        std::to_string(solar_kw.size()));
  for (double v : load_kw)
    if (v < 0.0) throw csv::CsvError("forecast load must be >= 0");
  for (double v : wind_kw)
    if (v < 0.0) throw csv::CsvError("forecast wind must be >= 0");
  for (double v : solar_kw)
    if (v < 0.0) throw csv::CsvError("forecast solar must be >= 0");
  return ForecastSeries{std::move(load_kw), std::move(wind_kw), std::move(solar_kw)};
}

double max_relative_netload_deviation(const ForecastSeries& forecast,
                                      const ActualSeries& actual,
                                      int ticks_per_interval) {
  double worst = 0.0;
  for (size_t c = 0; c < actual.ticks(); ++c) {
    size_t t = c / ticks_per_interval;
    double fc = forecast.netload_kw(t);
    double dev = std::abs(actual.netload_kw(c) - fc) / std::max(std::abs(fc), 1.0);
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace mgems
