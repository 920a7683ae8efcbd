#include "mgems/milp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mgems::milp {

namespace {

struct Node {
  double bound;  // parent relaxation objective, lower bounds this subtree
  int depth;
  long id;
  std::vector<std::pair<int, double>> fixes;  // (binary index, 0 or 1)
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // smallest bound first
    if (a.depth != b.depth) return a.depth < b.depth;  // deeper first
    return a.id > b.id;                                // then FIFO
  }
};

}  // namespace

MipSolution solve_mip(const MixedProgram& mp, const MipOptions& opts) {
  for (int j : mp.binary_indices) {
    if (j < 0 || j >= mp.lp.n)
      throw lp::SolverError("binary index " + std::to_string(j) + " out of range");
    if (mp.lp.lower[j] < -opts.int_tol || mp.lp.upper[j] > 1.0 + opts.int_tol)
      throw lp::SolverError("binary variable x" + std::to_string(j) +
                            " must have bounds within [0,1]");
  }
  long node_limit = opts.node_limit;
  if (node_limit == 0) {
    size_t k = mp.binary_indices.size();
    node_limit = k + 4 >= 62 ? std::numeric_limits<long>::max() : (1L << (k + 4));
  }

  MipSolution sol;
  bool have_incumbent = false;
  double incumbent_obj = lp::kInf;
  std::vector<double> incumbent_x;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{-lp::kInf, 0, next_id++, {}});

  lp::LinearProgram relax = mp.lp;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (have_incumbent &&
        node.bound >= incumbent_obj - 1e-9 * std::max(1.0, std::abs(incumbent_obj)))
      continue;  // bound pruning without solving

    if (sol.nodes_explored >= node_limit)
      throw lp::SolverError("node limit exceeded (" + std::to_string(node_limit) +
                            "): likely a modeling bug");
    ++sol.nodes_explored;

    // Apply this node's fixings on a scratch copy of the bounds.
    relax.lower = mp.lp.lower;
    relax.upper = mp.lp.upper;
    for (const auto& [j, v] : node.fixes) {
      relax.lower[j] = v;
      relax.upper[j] = v;
    }

    lp::LpSolution rel = lp::solve_lp(relax, opts.lp_opts);
    if (rel.status == lp::LpStatus::Unbounded)
      throw lp::SolverError("unbounded relaxation: mixed programs must be bounded");
    if (rel.status == lp::LpStatus::Infeasible) continue;
    if (have_incumbent &&
        rel.objective_value >= incumbent_obj - 1e-9 * std::max(1.0, std::abs(incumbent_obj)))
      continue;

    // Most-fractional binary, ties broken by lowest index.
    int branch_var = -1;
    double branch_frac = opts.int_tol;
    for (int j : mp.binary_indices) {
      double frac = std::min(rel.x[j], 1.0 - rel.x[j]);
      if (frac > branch_frac) {
        branch_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {  // integral within tolerance
      if (!have_incumbent || rel.objective_value < incumbent_obj) {
        have_incumbent = true;
        incumbent_obj = rel.objective_value;
        incumbent_x = rel.x;
        for (int j : mp.binary_indices) incumbent_x[j] = std::round(incumbent_x[j]);
        sol.incumbent_history.push_back(incumbent_obj);
      }
      continue;
    }

    for (double v : {0.0, 1.0}) {
      Node child;
      child.bound = rel.objective_value;
      child.depth = node.depth + 1;
      child.id = next_id++;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch_var, v);
      open.push(std::move(child));
    }
  }

  if (have_incumbent) {
    sol.status = MipStatus::Optimal;
    sol.x = std::move(incumbent_x);
    sol.objective_value = incumbent_obj;
  } else {
    sol.status = MipStatus::Infeasible;
  }
  return sol;
}

}  // namespace mgems::milp
