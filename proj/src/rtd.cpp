#include "mgems/rtd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mgems::rtd {

namespace {

using lp::Relation;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string row_family_name(RowFamily family) {
  switch (family) {
    case RowFamily::Balance: return "balance";
    case RowFamily::EnergyRecursion: return "energy-recursion";
    case RowFamily::Reserve: return "reserve";
    case RowFamily::Ramp: return "ramp";
    case RowFamily::EssRate: return "ess-rate";
    case RowFamily::EssStatus: return "ess-status";
    case RowFamily::GridLimit: return "grid-limit";
    case RowFamily::GridStatus: return "grid-status";
  }
  return "unknown";
}

WindowData slice_window(const MicrogridModel& model, const ForecastSeries& forecast,
                        int start, int length) {
  WindowData w;
  for (int k = 0; k < length; ++k) {
    int t = start + k;
    if (t >= static_cast<int>(forecast.horizon()))
      throw ConfigError("forecast series: missing interval " + std::to_string(t));
    if (t >= static_cast<int>(model.grid.buy_price.size()))
      throw ConfigError("price series: missing interval " + std::to_string(t));
    if (t >= static_cast<int>(model.commitment.size()))
      throw ConfigError("commitment schedule: missing interval " + std::to_string(t));
    w.load_kw.push_back(forecast.load_kw[t]);
    w.injection_kw.push_back(forecast.injection_kw(t));
    w.buy_price.push_back(model.grid.buy_price[t]);
    w.sell_price.push_back(model.grid.sell_price[t]);
    w.commitment.push_back(model.commitment[t]);
  }
  return w;
}

DispatchProgram build_dispatch(const MicrogridModel& model, const WindowData& window,
                               const std::vector<double>& e_start,
                               const std::optional<std::vector<double>>& prev_gen_kw) {
  const int L = window.length();
  const int G = static_cast<int>(model.generators.size());
  const int S = static_cast<int>(model.storage.size());
  if (L < 1) throw std::invalid_argument("window must contain at least one interval");
  if (static_cast<int>(e_start.size()) != S)
    throw std::invalid_argument("e_start must have one entry per storage unit");
  if (prev_gen_kw && static_cast<int>(prev_gen_kw->size()) != G)
    throw std::invalid_argument("prev_gen_kw must have one entry per generator");

  for (int s = 0; s < S; ++s) {
    const auto& ess = model.storage[s];
    const double lo = ess.e_min + ess.delta_e;
    const double hi = ess.e_max - ess.delta_e;
    if (e_start[s] < lo - 1e-9 || e_start[s] > hi + 1e-9)
      throw DispatchFailure(0, "anchoring",
                            "storage '" + ess.id + "' anchor " + fmt(e_start[s]) +
                                " kWh outside withheld band [" + fmt(lo) + ", " +
                                fmt(hi) + "]");
  }

  DispatchProgram prog;
  prog.idx = DispatchIndex{G, S, L};
  auto& lpm = prog.mp.lp;
  const DispatchIndex& ix = prog.idx;
  const double dt = model.dt_dispatch_hours();

  lpm.n = 0;
  // Continuous block, interval-major; variable order must match DispatchIndex.
  for (int t = 0; t < L; ++t) {
    for (int g = 0; g < G; ++g) {
      const auto& gen = model.generators[g];
      bool on = window.commitment[t][g] != 0;
      lpm.add_variable(on ? gen.p_min : 0.0, on ? gen.p_max : 0.0, gen.linear_cost);
    }
    for (int s = 0; s < S; ++s) {
      const auto& ess = model.storage[s];
      lpm.add_variable(0.0, std::max(0.0, ess.p_charge_max - ess.delta_p), 0.0);
    }
    for (int s = 0; s < S; ++s) {
      const auto& ess = model.storage[s];
      lpm.add_variable(0.0, std::max(0.0, ess.p_discharge_max - ess.delta_p), 0.0);
    }
    lpm.add_variable(0.0, model.grid.p_max, window.buy_price[t]);
    lpm.add_variable(0.0, model.grid.p_max, -window.sell_price[t]);
    for (int s = 0; s < S; ++s) {
      const auto& ess = model.storage[s];
      lpm.add_variable(ess.e_min + ess.delta_e, ess.e_max - ess.delta_e, 0.0);
    }
  }
  for (int t = 0; t < L; ++t) {
    for (int k = 0; k < ix.binaries_per_interval(); ++k) {
      prog.mp.binary_indices.push_back(lpm.add_variable(0.0, 1.0, 0.0));
    }
  }

  auto tag = [&prog](RowFamily family, int t, int device) {
    prog.row_tags.push_back(RowTag{family, t, device});
  };

  for (int t = 0; t < L; ++t) {
    // Power balance: buy - sell + generation + discharge - charge = net-load.
    {
      std::vector<std::pair<int, double>> row;
      row.emplace_back(ix.pgb(t), 1.0);
      row.emplace_back(ix.pgs(t), -1.0);
      for (int g = 0; g < G; ++g) row.emplace_back(ix.pg(t, g), 1.0);
      for (int s = 0; s < S; ++s) {
        row.emplace_back(ix.psd(t, s), 1.0);
        row.emplace_back(ix.psc(t, s), -1.0);
      }
      lpm.add_row(std::move(row), Relation::Equal, window.load_kw[t] - window.injection_kw[t]);
      tag(RowFamily::Balance, t, -1);
    }
    // Stored energy recursion, anchored at e_start for the first interval.
    for (int s = 0; s < S; ++s) {
      std::vector<std::pair<int, double>> row;
      row.emplace_back(ix.es(t, s), 1.0);
      row.emplace_back(ix.psd(t, s), dt);
      row.emplace_back(ix.psc(t, s), -dt);
      double rhs = 0.0;
      if (t == 0) {
        rhs = e_start[s];
      } else {
        row.emplace_back(ix.es(t - 1, s), -1.0);
      }
      lpm.add_row(std::move(row), Relation::Equal, rhs);
      tag(RowFamily::EnergyRecursion, t, s);
    }
    // Backup capacity: grid headroom plus generator headroom covers the
    // reserve fraction of the load.
    {
      std::vector<std::pair<int, double>> row;
      row.emplace_back(ix.pgb(t), -1.0);
      row.emplace_back(ix.pgs(t), 1.0);
      double headroom_const = model.grid.p_max;
      for (int g = 0; g < G; ++g) {
        row.emplace_back(ix.pg(t, g), -1.0);
        headroom_const += model.generators[g].p_max;
      }
      lpm.add_row(std::move(row), Relation::GreaterEqual,
                  model.reserve_fraction * window.load_kw[t] - headroom_const);
      tag(RowFamily::Reserve, t, -1);
    }
    // Ramp band between consecutive intervals; the first interval is
    // anchored to the previously implemented setpoints when available.
    for (int g = 0; g < G; ++g) {
      const double band = dt * model.generators[g].ramp;
      if (t == 0) {
        if (!prev_gen_kw) continue;
        double prev = (*prev_gen_kw)[g];
        lpm.add_row({{ix.pg(0, g), 1.0}}, Relation::LessEqual, prev + band);
        tag(RowFamily::Ramp, 0, g);
        lpm.add_row({{ix.pg(0, g), 1.0}}, Relation::GreaterEqual, prev - band);
        tag(RowFamily::Ramp, 0, g);
      } else {
        lpm.add_row({{ix.pg(t, g), 1.0}, {ix.pg(t - 1, g), -1.0}}, Relation::LessEqual, band);
        tag(RowFamily::Ramp, t, g);
        lpm.add_row({{ix.pg(t, g), 1.0}, {ix.pg(t - 1, g), -1.0}}, Relation::GreaterEqual, -band);
        tag(RowFamily::Ramp, t, g);
      }
    }
    // Charge/discharge rate limits tied to the phase statuses, with the
    // withheld band removed from what dispatch may schedule.
    for (int s = 0; s < S; ++s) {
      const auto& ess = model.storage[s];
      lpm.add_row({{ix.psc(t, s), 1.0}, {ix.usc(t, s), -(ess.p_charge_max - ess.delta_p)}},
                  Relation::LessEqual, 0.0);
      tag(RowFamily::EssRate, t, s);
      lpm.add_row({{ix.psc(t, s), 1.0}, {ix.usc(t, s), -(ess.p_charge_min + ess.delta_p)}},
                  Relation::GreaterEqual, 0.0);
      tag(RowFamily::EssRate, t, s);
      lpm.add_row({{ix.psd(t, s), 1.0}, {ix.usd(t, s), -(ess.p_discharge_max - ess.delta_p)}},
                  Relation::LessEqual, 0.0);
      tag(RowFamily::EssRate, t, s);
      lpm.add_row({{ix.psd(t, s), 1.0}, {ix.usd(t, s), -(ess.p_discharge_min + ess.delta_p)}},
                  Relation::GreaterEqual, 0.0);
      tag(RowFamily::EssRate, t, s);
    }
    for (int s = 0; s < S; ++s) {
      lpm.add_row({{ix.usc(t, s), 1.0}, {ix.usd(t, s), 1.0}}, Relation::Equal, 1.0);
      tag(RowFamily::EssStatus, t, s);
    }
    lpm.add_row({{ix.pgb(t), 1.0}, {ix.ugb(t), -model.grid.p_max}}, Relation::LessEqual, 0.0);
    tag(RowFamily::GridLimit, t, -1);
    lpm.add_row({{ix.pgs(t), 1.0}, {ix.ugs(t), -model.grid.p_max}}, Relation::LessEqual, 0.0);
    tag(RowFamily::GridLimit, t, -1);
    lpm.add_row({{ix.ugb(t), 1.0}, {ix.ugs(t), 1.0}}, Relation::LessEqual, 1.0);
    tag(RowFamily::GridStatus, t, -1);
  }

  return prog;
}

DispatchSolution extract_solution(const DispatchProgram& program,
                                  const milp::MipSolution& mip) {
  const DispatchIndex& ix = program.idx;
  DispatchSolution sol;
  sol.window_len = ix.window;
  sol.objective = mip.objective_value;
  sol.nodes_explored = mip.nodes_explored;
  const auto& x = mip.x;
  for (int t = 0; t < ix.window; ++t) {
    std::vector<double> gen, psc, psd, es;
    std::vector<int> usc, usd;
    for (int g = 0; g < ix.n_gen; ++g) gen.push_back(x[ix.pg(t, g)]);
    for (int s = 0; s < ix.n_ess; ++s) {
      psc.push_back(x[ix.psc(t, s)]);
      psd.push_back(x[ix.psd(t, s)]);
      es.push_back(x[ix.es(t, s)]);
      usc.push_back(static_cast<int>(std::lround(x[ix.usc(t, s)])));
      usd.push_back(static_cast<int>(std::lround(x[ix.usd(t, s)])));
    }
    sol.gen_kw.push_back(std::move(gen));
    sol.ess_charge_kw.push_back(std::move(psc));
    sol.ess_discharge_kw.push_back(std::move(psd));
    sol.ess_energy_kwh.push_back(std::move(es));
    sol.grid_buy_kw.push_back(x[ix.pgb(t)]);
    sol.grid_sell_kw.push_back(x[ix.pgs(t)]);
    sol.charge_status.push_back(std::move(usc));
    sol.discharge_status.push_back(std::move(usd));
    sol.buy_status.push_back(static_cast<int>(std::lround(x[ix.ugb(t)])));
    sol.sell_status.push_back(static_cast<int>(std::lround(x[ix.ugs(t)])));
  }
  return sol;
}

std::vector<std::string> validate_solution(const MicrogridModel& model,
                                           const WindowData& window,
                                           const std::vector<double>& e_start,
                                           const std::optional<std::vector<double>>& prev_gen_kw,
                                           const DispatchSolution& sol, double tol) {
  std::vector<std::string> bad;
  auto complain = [&bad](int t, const std::string& what) {
    bad.push_back("interval " + std::to_string(t) + ": " + what);
  };
  const int L = sol.window_len;
  const int G = static_cast<int>(model.generators.size());
  const int S = static_cast<int>(model.storage.size());
  const double dt = model.dt_dispatch_hours();

  for (int t = 0; t < L; ++t) {
    double balance = sol.grid_buy_kw[t] - sol.grid_sell_kw[t];
    for (int g = 0; g < G; ++g) balance += sol.gen_kw[t][g];
    for (int s = 0; s < S; ++s)
      balance += sol.ess_discharge_kw[t][s] - sol.ess_charge_kw[t][s];
    double netload = window.load_kw[t] - window.injection_kw[t];
    if (std::abs(balance - netload) > tol)
      complain(t, "power balance off by " + fmt(balance - netload) + " kW");

    double headroom = model.grid.p_max - sol.grid_buy_kw[t] + sol.grid_sell_kw[t];
    for (int g = 0; g < G; ++g)
      headroom += model.generators[g].p_max - sol.gen_kw[t][g];
    if (headroom < model.reserve_fraction * window.load_kw[t] - tol)
      complain(t, "reserve short: headroom " + fmt(headroom) + " kW");

    for (int g = 0; g < G; ++g) {
      const auto& gen = model.generators[g];
      double p = sol.gen_kw[t][g];
      if (window.commitment[t][g]) {
        if (p < gen.p_min - tol || p > gen.p_max + tol)
          complain(t, "generator " + gen.id + " at " + fmt(p) + " kW outside limits");
      } else if (std::abs(p) > tol) {
        complain(t, "generator " + gen.id + " not at zero while off");
      }
      double band = dt * gen.ramp;
      if (t > 0 && std::abs(sol.gen_kw[t][g] - sol.gen_kw[t - 1][g]) > band + tol)
        complain(t, "generator " + gen.id + " ramp band exceeded");
      if (t == 0 && prev_gen_kw &&
          std::abs(sol.gen_kw[0][g] - (*prev_gen_kw)[g]) > band + tol)
        complain(t, "generator " + gen.id + " ramp anchor exceeded");
    }

    for (int s = 0; s < S; ++s) {
      const auto& ess = model.storage[s];
      double pc = sol.ess_charge_kw[t][s];
      double pd = sol.ess_discharge_kw[t][s];
      int uc = sol.charge_status[t][s];
      int ud = sol.discharge_status[t][s];
      if (uc + ud != 1) complain(t, "storage " + ess.id + " status pair != 1");
      if (pc < uc * (ess.p_charge_min + ess.delta_p) - tol ||
          pc > uc * (ess.p_charge_max - ess.delta_p) + tol)
        complain(t, "storage " + ess.id + " charge rate outside withheld band");
      if (pd < ud * (ess.p_discharge_min + ess.delta_p) - tol ||
          pd > ud * (ess.p_discharge_max - ess.delta_p) + tol)
        complain(t, "storage " + ess.id + " discharge rate outside withheld band");
      if (std::min(pc, pd) > tol)
        complain(t, "storage " + ess.id + " charges and discharges simultaneously");
      double prev_e = t == 0 ? e_start[s] : sol.ess_energy_kwh[t - 1][s];
      double expect = prev_e - dt * (pd - pc);
      if (std::abs(sol.ess_energy_kwh[t][s] - expect) > tol)
        complain(t, "storage " + ess.id + " energy recursion off by " +
                        fmt(sol.ess_energy_kwh[t][s] - expect) + " kWh");
      if (sol.ess_energy_kwh[t][s] < ess.e_min + ess.delta_e - tol ||
          sol.ess_energy_kwh[t][s] > ess.e_max - ess.delta_e + tol)
        complain(t, "storage " + ess.id + " energy outside withheld band");
    }

    double pb = sol.grid_buy_kw[t];
    double ps = sol.grid_sell_kw[t];
    if (pb < -tol || pb > sol.buy_status[t] * model.grid.p_max + tol)
      complain(t, "grid purchase outside status-coupled limit");
    if (ps < -tol || ps > sol.sell_status[t] * model.grid.p_max + tol)
      complain(t, "grid sale outside status-coupled limit");
    if (sol.buy_status[t] + sol.sell_status[t] > 1)
      complain(t, "grid buys and sells simultaneously");
    if (std::min(pb, ps) > tol) complain(t, "grid power both directions nonzero");
  }
  return bad;
}

namespace {

// Elastic relaxation: every row gains penalized violation variables and the
// binaries stay continuous. The cheapest total violation points at the
// constraint family that made the window infeasible.
std::pair<std::string, int> diagnose_infeasibility(const DispatchProgram& program) {
  lp::LinearProgram elastic = program.mp.lp;
  std::vector<int> elastic_of_row(elastic.rows.size(), -1);
  std::vector<int> elastic_of_row2(elastic.rows.size(), -1);
  for (size_t i = 0; i < elastic.rows.size(); ++i) {
    switch (elastic.rows[i].rel) {
      case Relation::LessEqual:
        elastic_of_row[i] = elastic.add_variable(0.0, lp::kInf, 1.0);
        elastic.rows[i].coeffs.emplace_back(elastic_of_row[i], -1.0);
        break;
      case Relation::GreaterEqual:
        elastic_of_row[i] = elastic.add_variable(0.0, lp::kInf, 1.0);
        elastic.rows[i].coeffs.emplace_back(elastic_of_row[i], 1.0);
        break;
      case Relation::Equal:
        elastic_of_row[i] = elastic.add_variable(0.0, lp::kInf, 1.0);
        elastic_of_row2[i] = elastic.add_variable(0.0, lp::kInf, 1.0);
        elastic.rows[i].coeffs.emplace_back(elastic_of_row[i], -1.0);
        elastic.rows[i].coeffs.emplace_back(elastic_of_row2[i], 1.0);
        break;
    }
  }
  for (int j = 0; j < program.mp.lp.n; ++j) elastic.objective[j] = 0.0;

  lp::LpSolution sol = lp::solve_lp(elastic);
  if (sol.status != lp::LpStatus::Optimal || sol.objective_value <= 1e-6)
    return {"binary-status", 0};  // the linear relaxation itself is feasible
  for (size_t i = 0; i < program.row_tags.size(); ++i) {
    double used = 0.0;
    if (elastic_of_row[i] >= 0) used += sol.x[elastic_of_row[i]];
    if (elastic_of_row2[i] >= 0) used += sol.x[elastic_of_row2[i]];
    if (used > 1e-6)
      return {row_family_name(program.row_tags[i].family), program.row_tags[i].interval};
  }
  return {"unknown", 0};
}

}  // namespace

double tie_line_target(const DispatchTarget& target) { return target.tie_target_kw; }

MpcStepResult run_mpc_step(const MicrogridModel& model, const ForecastSeries& forecast,
                           int t, MpcState& state) {
  const int horizon = static_cast<int>(forecast.horizon());
  if (t < 0 || t >= horizon)
    throw std::invalid_argument("dispatch interval " + std::to_string(t) +
                                " outside horizon 0.." + std::to_string(horizon - 1));
  const int L = std::min(model.window, horizon - t);
  const int S = static_cast<int>(model.storage.size());

  MpcStepResult out;
  out.window = slice_window(model, forecast, t, L);

  // Anchor the energy recursion at the measured state of charge, clamped to
  // the withheld band when control activity has pushed it inside.
  out.e_anchor = state.soc_kwh;
  for (int s = 0; s < S; ++s) {
    const auto& ess = model.storage[s];
    double lo = ess.e_min + ess.delta_e;
    double hi = ess.e_max - ess.delta_e;
    double clamped = std::clamp(out.e_anchor[s], lo, hi);
    if (clamped != out.e_anchor[s]) out.soc_clamped = true;
    out.e_anchor[s] = clamped;
  }

  DispatchProgram program = build_dispatch(model, out.window, out.e_anchor, state.prev_gen_kw);
  milp::MipSolution mip = milp::solve_mip(program.mp);
  if (mip.status == milp::MipStatus::Infeasible) {
    auto [family, rel_interval] = diagnose_infeasibility(program);
    throw DispatchFailure(t + rel_interval, family,
                          "window of " + std::to_string(L) + " intervals starting at " +
                              std::to_string(t) + " has no feasible dispatch");
  }
  out.window_solution = extract_solution(program, mip);

  DispatchTarget& target = out.target;
  target.interval = t;
  target.gen_kw = out.window_solution.gen_kw[0];
  for (int s = 0; s < S; ++s) {
    target.ess_net_kw.push_back(out.window_solution.ess_discharge_kw[0][s] -
                                out.window_solution.ess_charge_kw[0][s]);
    target.ess_planned_soc_kwh.push_back(out.window_solution.ess_energy_kwh[0][s]);
  }
  target.tie_target_kw = out.window_solution.grid_buy_kw[0] - out.window_solution.grid_sell_kw[0];
  target.window_objective = out.window_solution.objective;
  target.nodes_explored = out.window_solution.nodes_explored;

  state.prev_gen_kw = target.gen_kw;
  return out;
}

}  // namespace mgems::rtd
