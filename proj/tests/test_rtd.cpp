#include <doctest.h>

#include <cmath>

#include "mgems/rtd.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mgems;
using namespace mgems::rtd;

TEST_CASE("window program size is a function of fleet and window") {
  testutil::ModelParams p;
  p.n_gen = 3;
  MicrogridModel m = testutil::make_model(p);
  ForecastSeries fc = testutil::flat_forecast(8, 300.0);
  WindowData w = slice_window(m, fc, 0, 4);
  DispatchProgram prog = build_dispatch(m, w, {m.storage[0].e_initial}, std::nullopt);
  CHECK(prog.idx.binary_count() == 16);       // 4 x (2 storage + 2 grid)
  CHECK(prog.idx.continuous_count() == 32);   // 4 x (3 + 2 + 2 + 1)
  CHECK(prog.mp.lp.n == 48);
  CHECK(prog.mp.binary_indices.size() == 16);
  DispatchProgram again = build_dispatch(m, w, {m.storage[0].e_initial}, std::nullopt);
  CHECK(prog.mp.lp.rows.size() == again.mp.lp.rows.size());
  CHECK(prog.row_tags.size() == prog.mp.lp.rows.size());
}

TEST_CASE("zero net-load with a free grid dispatches nothing") {
  testutil::ModelParams p;
  p.delta_p = 0.0;
  p.buy_price = 0.0;
  MicrogridModel m = testutil::make_model(p);
  ForecastSeries fc = testutil::flat_forecast(8, 0.0);
  WindowData w = slice_window(m, fc, 0, 4);
  DispatchProgram prog = build_dispatch(m, w, {120.0}, std::nullopt);
  milp::MipSolution mip = milp::solve_mip(prog.mp);
  REQUIRE(mip.status == milp::MipStatus::Optimal);
  CHECK(mip.objective_value == doctest::Approx(0.0).epsilon(1e-9));
  DispatchSolution sol = extract_solution(prog, mip);
  for (int t = 0; t < 4; ++t) {
    for (double g : sol.gen_kw[t]) CHECK(g == doctest::Approx(0.0));
    CHECK(sol.grid_buy_kw[t] == doctest::Approx(0.0));
    CHECK(sol.grid_sell_kw[t] == doctest::Approx(0.0));
  }
  CHECK(validate_solution(m, w, {120.0}, std::nullopt, sol).empty());
}

TEST_CASE("cheap grid displaces an expensive generator") {
  testutil::ModelParams p;
  p.n_gen = 1;
  p.delta_p = 0.0;
  p.buy_price = 0.02;  // below the generator's 0.10 per kWh
  MicrogridModel m = testutil::make_model(p);
  ForecastSeries fc = testutil::flat_forecast(4, 100.0);
  WindowData w = slice_window(m, fc, 0, 1);
  // Anchoring at the energy floor rules out discharging, so the whole load
  // must come from either the generator or the grid.
  double floor = m.storage[0].e_min + m.storage[0].delta_e;
  DispatchProgram prog = build_dispatch(m, w, {floor}, std::nullopt);
  milp::MipSolution mip = milp::solve_mip(prog.mp);
  REQUIRE(mip.status == milp::MipStatus::Optimal);
  DispatchSolution sol = extract_solution(prog, mip);
  CHECK(sol.gen_kw[0][0] == doctest::Approx(0.0));
  CHECK(sol.grid_buy_kw[0] == doctest::Approx(100.0));
  CHECK(mip.objective_value == doctest::Approx(2.0));  // 0.02 x 100

  oracles::MipOptimum oracle = oracles::enumerate_mip_optimum(prog.mp);
  REQUIRE(oracle.feasible);
  CHECK(mip.objective_value ==
        doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("anchoring at the withheld ceiling disables net charging") {
  MicrogridModel m = testutil::make_model();
  const auto& ess = m.storage[0];
  double ceiling = ess.e_max - ess.delta_e;
  ForecastSeries fc = testutil::flat_forecast(8, 250.0);
  WindowData w = slice_window(m, fc, 0, 4);
  DispatchProgram prog = build_dispatch(m, w, {ceiling}, std::nullopt);
  milp::MipSolution mip = milp::solve_mip(prog.mp);
  REQUIRE(mip.status == milp::MipStatus::Optimal);
  DispatchSolution sol = extract_solution(prog, mip);
  CHECK(sol.ess_energy_kwh[0][0] <= ceiling + 1e-6);
  CHECK(sol.ess_charge_kw[0][0] <= sol.ess_discharge_kw[0][0] + 1e-6);
  CHECK(validate_solution(m, w, {ceiling}, std::nullopt, sol).empty());
}

TEST_CASE("anchoring outside the withheld band is rejected before solving") {
  MicrogridModel m = testutil::make_model();
  ForecastSeries fc = testutil::flat_forecast(8, 250.0);
  WindowData w = slice_window(m, fc, 0, 4);
  try {
    build_dispatch(m, w, {m.storage[0].e_max}, std::nullopt);
    FAIL("expected DispatchFailure");
  } catch (const DispatchFailure& e) {
    CHECK(e.family == "anchoring");
  }
}

TEST_CASE("window truncates at the horizon end") {
  MicrogridModel m = testutil::make_model(testutil::ModelParams{.horizon = 12});
  ForecastSeries fc = testutil::flat_forecast(12, 250.0);
  MpcState state;
  state.soc_kwh = {120.0};
  MpcStepResult step = run_mpc_step(m, fc, 11, state);
  CHECK(step.window_solution.window_len == 1);
  CHECK(std::abs(step.target.tie_target_kw) <= m.grid.p_max);
}

TEST_CASE("tie-line target signs follow the buy/sell convention") {
  DispatchTarget t;
  t.tie_target_kw = 817.0;  // buy 817, sell 0
  CHECK(tie_line_target(t) == 817.0);
  t.tie_target_kw = 0.0;
  CHECK(tie_line_target(t) == 0.0);
  t.tie_target_kw = -200.0;  // sell 200
  CHECK(tie_line_target(t) == -200.0);
}

TEST_CASE("reserve constraint is honored as printed") {
  MicrogridModel m = testutil::make_model();
  m.reserve_fraction = 0.4;
  ForecastSeries fc = testutil::flat_forecast(8, 350.0);
  WindowData w = slice_window(m, fc, 0, 4);
  DispatchProgram prog = build_dispatch(m, w, {120.0}, std::nullopt);
  milp::MipSolution mip = milp::solve_mip(prog.mp);
  REQUIRE(mip.status == milp::MipStatus::Optimal);
  DispatchSolution sol = extract_solution(prog, mip);
  for (int t = 0; t < 4; ++t) {
    double headroom = m.grid.p_max - sol.grid_buy_kw[t] + sol.grid_sell_kw[t];
    for (size_t g = 0; g < m.generators.size(); ++g)
      headroom += m.generators[g].p_max - sol.gen_kw[t][g];
    CHECK(headroom >= m.reserve_fraction * w.load_kw[t] - 1e-6);
  }
}

TEST_CASE("rolling the window anchored on the plan reproduces the plan") {
  // Horizon equal to the window, strictly varying prices: the tail of the
  // first solution is the unique optimum of the shorter second window.
  testutil::ModelParams p;
  p.horizon = 4;
  p.buy_price = 0.02;
  p.price_step = 0.004;
  MicrogridModel m = testutil::make_model(p);
  ForecastSeries fc = testutil::flat_forecast(4, 250.0);

  MpcState state;
  state.soc_kwh = {120.0};
  MpcStepResult first = run_mpc_step(m, fc, 0, state);
  const DispatchSolution& plan = first.window_solution;

  MpcState next;
  next.soc_kwh = {plan.ess_energy_kwh[0][0]};
  next.prev_gen_kw = plan.gen_kw[0];
  MpcStepResult second = run_mpc_step(m, fc, 1, next);
  CHECK(second.window_solution.window_len == 3);
  for (size_t g = 0; g < m.generators.size(); ++g)
    CHECK(second.target.gen_kw[g] == doctest::Approx(plan.gen_kw[1][g]).epsilon(1e-6));
  CHECK(second.target.ess_net_kw[0] ==
        doctest::Approx(plan.ess_discharge_kw[1][0] - plan.ess_charge_kw[1][0])
            .epsilon(1e-6));
  CHECK(second.target.tie_target_kw ==
        doctest::Approx(plan.grid_buy_kw[1] - plan.grid_sell_kw[1]).epsilon(1e-6));
}

TEST_CASE("impossible balance raises a dispatch failure naming the family") {
  testutil::ModelParams p;
  p.grid_p_max = 100.0;
  MicrogridModel m = testutil::make_model(p);
  ForecastSeries fc = testutil::flat_forecast(8, 2000.0);  // beyond all capacity
  MpcState state;
  state.soc_kwh = {120.0};
  try {
    run_mpc_step(m, fc, 0, state);
    FAIL("expected DispatchFailure");
  } catch (const DispatchFailure& e) {
    CHECK(e.family == "balance");
    CHECK(e.interval == 0);
  }
}

TEST_CASE("solved random window programs pass the independent validator") {
  int optimal_seen = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    oracles::RandomDispatchInstance inst = oracles::random_dispatch_instance(seed);
    milp::MipSolution mip = milp::solve_mip(inst.program.mp);
    if (mip.status != milp::MipStatus::Optimal) continue;
    ++optimal_seen;
    DispatchSolution sol = extract_solution(inst.program, mip);
    auto violations =
        validate_solution(inst.model, inst.window, inst.e_start, std::nullopt, sol);
    CHECK_MESSAGE(violations.empty(),
                  "seed ", seed, ": ", violations.empty() ? "" : violations.front());
  }
  CHECK(optimal_seen > 10);
}
