// Mixed binary-continuous solver: branch and bound over the binary variables,
// with every relaxation delegated to the bounded-variable simplex.
#pragma once

#include <vector>

#include "mgems/lp.hpp"

namespace mgems::milp {

struct MixedProgram {
  lp::LinearProgram lp;
  std::vector<int> binary_indices;  // variables constrained to {0,1}
};

enum class MipStatus { Optimal, Infeasible };

struct MipSolution {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> x;  // binaries are exact 0/1 when Optimal
  double objective_value = 0.0;
  long nodes_explored = 0;
  // Incumbent objective after each improvement, in discovery order.
  std::vector<double> incumbent_history;
};

struct MipOptions {
  double int_tol = 1e-6;
  lp::SimplexOptions lp_opts{};
  long node_limit = 0;  // 0 selects 2^(|binaries|+4)
};

// Deterministic search: most-fractional branching (ties to the lowest
// index), best-bound node selection (ties to the deeper node, then FIFO).
MipSolution solve_mip(const MixedProgram& mp, const MipOptions& opts = {});

}  // namespace mgems::milp
