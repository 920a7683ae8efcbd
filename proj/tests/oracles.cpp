#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace oracles {

using mgems::lp::kInf;
using mgems::lp::LinearProgram;
using mgems::lp::Relation;

namespace {

// Dense solve of B x = rhs by Gaussian elimination; false when singular.
bool dense_solve(std::vector<double> B, std::vector<double> rhs, int m,
                 std::vector<double>& out) {
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    double best = std::abs(B[static_cast<size_t>(col) * m + col]);
    for (int i = col + 1; i < m; ++i) {
      double cand = std::abs(B[static_cast<size_t>(i) * m + col]);
      if (cand > best) { best = cand; piv = i; }
    }
    if (best < 1e-11) return false;
    if (piv != col) {
      for (int j = 0; j < m; ++j)
        std::swap(B[static_cast<size_t>(piv) * m + j], B[static_cast<size_t>(col) * m + j]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (int i = col + 1; i < m; ++i) {
      double f = B[static_cast<size_t>(i) * m + col] / B[static_cast<size_t>(col) * m + col];
      if (f == 0.0) continue;
      for (int j = col; j < m; ++j)
        B[static_cast<size_t>(i) * m + j] -= f * B[static_cast<size_t>(col) * m + j];
      rhs[i] -= f * rhs[col];
    }
  }
  out.assign(m, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    double v = rhs[i];
    for (int j = i + 1; j < m; ++j) v -= B[static_cast<size_t>(i) * m + j] * out[j];
    out[i] = v / B[static_cast<size_t>(i) * m + i];
  }
  return true;
}

}  // namespace

LpOptimum enumerate_lp_optimum(const LinearProgram& lp, double feas_tol) {
  const int n = lp.n;
  const int m = static_cast<int>(lp.rows.size());
  const int cols = n + m;

  // Column-major dense [A | I] plus slack bounds by relation.
  std::vector<double> A(static_cast<size_t>(m) * cols, 0.0);
  std::vector<double> lo(cols), hi(cols), cost(cols, 0.0);
  for (int j = 0; j < n; ++j) {
    lo[j] = lp.lower[j];
    hi[j] = lp.upper[j];
    cost[j] = lp.objective[j];
    if (lo[j] == -kInf || hi[j] == kInf)
      throw std::invalid_argument("enumeration oracle needs finite structural bounds");
  }
  std::vector<double> b(m);
  for (int i = 0; i < m; ++i) {
    b[i] = lp.rows[i].rhs;
    for (const auto& [j, v] : lp.rows[i].coeffs) A[static_cast<size_t>(i) * cols + j] += v;
    int s = n + i;
    A[static_cast<size_t>(i) * cols + s] = 1.0;
    switch (lp.rows[i].rel) {
      case Relation::LessEqual: lo[s] = 0.0; hi[s] = kInf; break;
      case Relation::GreaterEqual: lo[s] = -kInf; hi[s] = 0.0; break;
      case Relation::Equal: lo[s] = 0.0; hi[s] = 0.0; break;
    }
  }

  LpOptimum best;
  if (m == 0) {
    // Pure bound problem: each variable sits at its cheaper bound.
    best.feasible = true;
    for (int j = 0; j < n; ++j)
      best.objective += cost[j] * (cost[j] >= 0.0 ? lo[j] : hi[j]);
    return best;
  }

  // Enumerate basis subsets of the columns.
  std::vector<int> pick(m);
  for (int i = 0; i < m; ++i) pick[i] = i;
  std::vector<double> B(static_cast<size_t>(m) * m), xb;
  std::vector<int> nonbasic;
  std::vector<double> x(cols);
  while (true) {
    nonbasic.clear();
    for (int j = 0, k = 0; j < cols; ++j) {
      if (k < m && pick[k] == j) { ++k; continue; }
      nonbasic.push_back(j);
    }
    // Nonbasic columns must rest on a finite bound; slacks only have one.
    std::vector<int> two_sided;  // nonbasic columns with two finite bounds
    bool placeable = true;
    for (int j : nonbasic) {
      bool lo_ok = lo[j] != -kInf, hi_ok = hi[j] != kInf;
      if (!lo_ok && !hi_ok) { placeable = false; break; }
      if (lo_ok && hi_ok && lo[j] != hi[j]) two_sided.push_back(j);
      x[j] = lo_ok ? lo[j] : hi[j];
    }
    if (placeable) {
      for (int i = 0; i < m; ++i)
        for (int r = 0; r < m; ++r)
          B[static_cast<size_t>(r) * m + i] = A[static_cast<size_t>(r) * cols + pick[i]];
      const unsigned patterns = 1u << two_sided.size();
      for (unsigned mask = 0; mask < patterns; ++mask) {
        for (size_t t = 0; t < two_sided.size(); ++t)
          x[two_sided[t]] = (mask >> t) & 1u ? hi[two_sided[t]] : lo[two_sided[t]];
        std::vector<double> rhs = b;
        for (int j : nonbasic) {
          if (x[j] == 0.0) continue;
          for (int r = 0; r < m; ++r) rhs[r] -= A[static_cast<size_t>(r) * cols + j] * x[j];
        }
        if (!dense_solve(B, rhs, m, xb)) break;  // singular for every pattern
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
          int j = pick[i];
          if (xb[i] < lo[j] - feas_tol || xb[i] > hi[j] + feas_tol) ok = false;
        }
        if (!ok) continue;
        double obj = 0.0;
        for (int i = 0; i < m; ++i) obj += cost[pick[i]] * xb[i];
        for (int j : nonbasic) obj += cost[j] * x[j];
        if (!best.feasible || obj < best.objective) {
          best.feasible = true;
          best.objective = obj;
        }
      }
    }
    // Next combination.
    int i = m - 1;
    while (i >= 0 && pick[i] == cols - m + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

MipOptimum enumerate_mip_optimum(const mgems::milp::MixedProgram& mp) {
  const auto& binaries = mp.binary_indices;
  const size_t k = binaries.size();
  if (k > 20) throw std::invalid_argument("enumeration oracle limited to 20 binaries");

  // Rows supported on binary variables alone can be checked per assignment
  // without an LP solve.
  std::vector<char> is_binary(mp.lp.n, 0);
  for (int j : binaries) is_binary[j] = 1;
  struct BinRow {
    std::vector<std::pair<int, double>> coeffs;  // positions in `binaries`
    Relation rel;
    double rhs;
  };
  std::vector<BinRow> bin_rows;
  std::vector<int> pos_of(mp.lp.n, -1);
  for (size_t i = 0; i < k; ++i) pos_of[binaries[i]] = static_cast<int>(i);
  for (const auto& row : mp.lp.rows) {
    bool binary_only = !row.coeffs.empty();
    for (const auto& [j, v] : row.coeffs)
      if (v != 0.0 && !is_binary[j]) { binary_only = false; break; }
    if (!binary_only) continue;
    BinRow br{{}, row.rel, row.rhs};
    for (const auto& [j, v] : row.coeffs) br.coeffs.emplace_back(pos_of[j], v);
    bin_rows.push_back(std::move(br));
  }

  MipOptimum best;
  mgems::lp::LinearProgram fixed = mp.lp;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    bool ok = true;
    for (const auto& br : bin_rows) {
      double lhs = 0.0;
      for (const auto& [pos, v] : br.coeffs) lhs += v * ((mask >> pos) & 1u);
      double diff = lhs - br.rhs;
      bool sat = br.rel == Relation::LessEqual      ? diff <= 1e-9
                 : br.rel == Relation::GreaterEqual ? diff >= -1e-9
                                                    : std::abs(diff) <= 1e-9;
      if (!sat) { ok = false; break; }
    }
    if (!ok) continue;
    for (size_t i = 0; i < k; ++i) {
      double v = (mask >> i) & 1u;
      fixed.lower[binaries[i]] = v;
      fixed.upper[binaries[i]] = v;
    }
    mgems::lp::LpSolution lps = mgems::lp::solve_lp(fixed);
    ++best.assignments_solved;
    if (lps.status != mgems::lp::LpStatus::Optimal) continue;
    if (!best.feasible || lps.objective_value < best.objective) {
      best.feasible = true;
      best.objective = lps.objective_value;
    }
  }
  return best;
}

LinearProgram random_bounded_lp(std::uint64_t seed, int n_vars, int n_rows) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) {
    return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  LinearProgram lp;
  for (int j = 0; j < n_vars; ++j) {
    double lo = rng() % 3 == 0 ? -uni(0.5, 4.0) : 0.0;
    double hi = lo + uni(0.5, 8.0);
    lp.add_variable(lo, hi, uni(-5.0, 5.0));
  }
  for (int i = 0; i < n_rows; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < n_vars; ++j)
      if (rng() % 4 != 0) coeffs.emplace_back(j, uni(-3.0, 3.0));
    if (coeffs.empty()) coeffs.emplace_back(static_cast<int>(rng() % n_vars), uni(0.5, 2.0));
    Relation rel = rng() % 5 == 0 ? Relation::Equal
                   : rng() % 2   ? Relation::LessEqual
                                 : Relation::GreaterEqual;
    lp.add_row(std::move(coeffs), rel, uni(-6.0, 6.0));
  }
  return lp;
}

RandomDispatchInstance random_dispatch_instance(std::uint64_t seed, int window_len) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) {
    return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  RandomDispatchInstance inst;
  auto& model = inst.model;

  int n_gen = 1 + static_cast<int>(rng() % 3);
  for (int g = 0; g < n_gen; ++g) {
    mgems::Generator gen;
    gen.id = "G" + std::to_string(g);
    gen.p_min = uni(0.0, 15.0);
    gen.p_max = gen.p_min + uni(20.0, 120.0);
    gen.ramp = uni(60.0, 400.0);
    gen.linear_cost = uni(0.01, 0.15);
    model.generators.push_back(gen);
  }
  mgems::EnergyStorage ess;
  ess.id = "S0";
  ess.e_min = uni(0.0, 60.0);
  ess.e_max = ess.e_min + uni(150.0, 500.0);
  ess.p_charge_min = 0.0;
  ess.p_charge_max = uni(60.0, 180.0);
  ess.p_discharge_min = 0.0;
  ess.p_discharge_max = ess.p_charge_max;
  ess.delta_p = uni(0.0, 0.4) * ess.p_charge_max;
  ess.delta_e = uni(0.0, 0.4) * (ess.e_max - ess.e_min);
  ess.e_initial = uni(ess.e_min + ess.delta_e, ess.e_max - ess.delta_e);
  model.storage.push_back(ess);

  model.grid.p_max = uni(400.0, 1500.0);
  model.reserve_fraction = uni(0.0, 0.2);
  model.window = window_len;

  auto& win = inst.window;
  for (int t = 0; t < window_len; ++t) {
    double buy = uni(0.01, 0.12);
    model.grid.buy_price.push_back(buy);
    model.grid.sell_price.push_back(0.8 * buy);
    win.buy_price.push_back(buy);
    win.sell_price.push_back(0.8 * buy);
    win.load_kw.push_back(uni(100.0, 900.0));
    win.injection_kw.push_back(uni(0.0, 500.0));
    std::vector<int> row;
    for (int g = 0; g < n_gen; ++g) row.push_back(rng() % 5 == 0 ? 0 : 1);
    win.commitment.push_back(row);
    model.commitment.push_back(row);
  }
  inst.e_start.push_back(ess.e_initial);
  inst.program = mgems::rtd::build_dispatch(model, win, inst.e_start, std::nullopt);
  return inst;
}

mgems::milp::MixedProgram random_mixed_program(std::uint64_t seed, int n_cont,
                                               int n_binary, int n_rows) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) {
    return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  mgems::milp::MixedProgram mp;
  for (int j = 0; j < n_cont; ++j) {
    double lo = 0.0;
    mp.lp.add_variable(lo, lo + uni(1.0, 6.0), uni(-4.0, 4.0));
  }
  for (int j = 0; j < n_binary; ++j)
    mp.binary_indices.push_back(mp.lp.add_variable(0.0, 1.0, uni(-3.0, 3.0)));
  int total = n_cont + n_binary;
  for (int i = 0; i < n_rows; ++i) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < total; ++j)
      if (rng() % 3 != 0) coeffs.emplace_back(j, uni(-2.0, 2.0));
    if (coeffs.empty()) coeffs.emplace_back(static_cast<int>(rng() % total), 1.0);
    Relation rel = rng() % 4 == 0 ? Relation::Equal
                   : rng() % 2   ? Relation::LessEqual
                                 : Relation::GreaterEqual;
    mp.lp.add_row(std::move(coeffs), rel, uni(-3.0, 5.0));
  }
  return mp;
}

}  // namespace oracles
