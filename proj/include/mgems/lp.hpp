// Exact solver for linear programs with individually bounded variables.
#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgems::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Row {
  std::vector<std::pair<int, double>> coeffs;  // sparse (variable, coefficient)
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
};

// Minimize objective . x subject to per-variable bounds and linear rows.
// Bounds may be +/-infinity (kInf).
struct LinearProgram {
  int n = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  int add_variable(double lo, double hi, double cost);
  void add_row(std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // empty unless Optimal
  double objective_value = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-7;  // absolute feasibility tolerance
  double opt_tol = 1e-9;   // reduced-cost threshold
  // 0 selects the defaults 50*(n+rows) and 10*(n+rows).
  int max_iterations = 0;
  int bland_after = 0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two-phase bounded-variable primal simplex. Deterministic: identical input
// yields an identical solution. Throws SolverError on malformed input or
// when the iteration limit is hit.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

// Row-by-row and bound-by-bound feasibility of a candidate point.
bool check_feasible(const LinearProgram& lp, const std::vector<double>& x,
                    double tol, std::string* first_violation = nullptr);

double objective_value(const LinearProgram& lp, const std::vector<double>& x);

// Plain-text dump, one row per line, for debugging.
std::string dump_lp(const LinearProgram& lp);

}  // namespace mgems::lp
