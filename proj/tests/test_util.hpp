// Shared builders for dispatch/control tests.
#pragma once

#include <string>
#include <vector>

#include "mgems/model.hpp"
#include "mgems/scenario.hpp"

namespace testutil {

struct ModelParams {
  int n_gen = 2;
  double gen_p_min = 0.0;
  double delta_p = 6.0;
  double delta_e = 8.0;
  double ess_p_max = 60.0;
  int horizon = 8;
  double buy_price = 0.03;  // constant when price_step == 0
  double price_step = 0.0;
  double grid_p_max = 500.0;
};

inline mgems::MicrogridModel make_model(const ModelParams& p = {}) {
  mgems::MicrogridModel m;
  const double pmax[3] = {100.0, 80.0, 60.0};
  const double cost[3] = {0.10, 0.12, 0.14};
  for (int g = 0; g < p.n_gen; ++g) {
    mgems::Generator gen;
    gen.id = "G" + std::to_string(g);
    gen.p_min = p.gen_p_min;
    gen.p_max = pmax[g % 3];
    gen.ramp = 200.0;
    gen.linear_cost = cost[g % 3];
    m.generators.push_back(gen);
  }
  mgems::EnergyStorage ess;
  ess.id = "ESS";
  ess.e_min = 20.0;
  ess.e_max = 220.0;
  ess.e_initial = 120.0;
  ess.p_charge_max = p.ess_p_max;
  ess.p_discharge_max = p.ess_p_max;
  ess.delta_p = p.delta_p;
  ess.delta_e = p.delta_e;
  m.storage.push_back(ess);
  m.grid.p_max = p.grid_p_max;
  for (int t = 0; t < p.horizon; ++t) {
    double buy = p.buy_price + p.price_step * t;
    m.grid.buy_price.push_back(buy);
    m.grid.sell_price.push_back(0.8 * buy);
    m.commitment.push_back(std::vector<int>(p.n_gen, 1));
  }
  m.reserve_fraction = 0.10;
  m.window = 4;
  mgems::validate_model(m);
  return m;
}

inline mgems::ForecastSeries flat_forecast(int horizon, double netload_kw) {
  std::vector<double> load(horizon, netload_kw), zero(horizon, 0.0);
  return mgems::make_forecast(load, zero, zero);
}

}  // namespace testutil
