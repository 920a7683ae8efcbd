#include "mgems/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mgems::lp {

int LinearProgram::add_variable(double lo, double hi, double cost) {
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(cost);
  return n++;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, Relation rel,
                            double rhs) {
  rows.push_back(Row{std::move(coeffs), rel, rhs});
}

bool check_feasible(const LinearProgram& lp, const std::vector<double>& x, double tol,
                    std::string* first_violation) {
  auto report = [&](const std::string& msg) {
    if (first_violation) *first_violation = msg;
    return false;
  };
  if (static_cast<int>(x.size()) != lp.n) return report("dimension mismatch");
  for (int j = 0; j < lp.n; ++j) {
    if (x[j] < lp.lower[j] - tol)
      return report("x" + std::to_string(j) + " below lower bound");
    if (x[j] > lp.upper[j] + tol)
      return report("x" + std::to_string(j) + " above upper bound");
  }
  for (size_t i = 0; i < lp.rows.size(); ++i) {
    double lhs = 0.0;
    for (const auto& [j, v] : lp.rows[i].coeffs) lhs += v * x[j];
    double diff = lhs - lp.rows[i].rhs;
    bool ok = lp.rows[i].rel == Relation::LessEqual      ? diff <= tol
              : lp.rows[i].rel == Relation::GreaterEqual ? diff >= -tol
                                                         : std::abs(diff) <= tol;
    if (!ok) return report("row " + std::to_string(i) + " violated by " +
                           std::to_string(std::abs(diff)));
  }
  return true;
}

double objective_value(const LinearProgram& lp, const std::vector<double>& x) {
  double obj = 0.0;
  for (int j = 0; j < lp.n; ++j) obj += lp.objective[j] * x[j];
  return obj;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "minimize\n ";
  for (int j = 0; j < lp.n; ++j)
    if (lp.objective[j] != 0.0) out << " " << num(lp.objective[j]) << " x" << j;
  out << "\nsubject to\n";
  for (size_t i = 0; i < lp.rows.size(); ++i) {
    out << "  r" << i << ":";
    for (const auto& [j, v] : lp.rows[i].coeffs) out << " " << num(v) << " x" << j;
    const char* rel = lp.rows[i].rel == Relation::LessEqual      ? "<="
                      : lp.rows[i].rel == Relation::GreaterEqual ? ">="
                                                                 : "=";
    out << " " << rel << " " << num(lp.rows[i].rhs) << "\n";
  }
  out << "bounds\n";
  for (int j = 0; j < lp.n; ++j) {
    if (lp.lower[j] == -kInf && lp.upper[j] == kInf) {
      out << "  x" << j << " free\n";
    } else {
      out << "  " << (lp.lower[j] == -kInf ? "-inf" : num(lp.lower[j])) << " <= x" << j
          << " <= " << (lp.upper[j] == kInf ? "inf" : num(lp.upper[j])) << "\n";
    }
  }
  return out.str();
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeAtZero };

// Bounded-variable primal simplex over the equality system [A | I] x = b,
// with one slack per row and one artificial per row for phase 1.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opts)
      : opts_(opts), n_(lp.n) {
    validate(lp);
    // Empty rows are decided immediately; every other row gets a slack.
    for (const auto& row : lp.rows) {
      bool empty = true;
      for (const auto& [j, v] : row.coeffs)
        if (v != 0.0) { empty = false; break; }
      if (empty) {
        bool ok = row.rel == Relation::LessEqual      ? 0.0 <= row.rhs + opts_.feas_tol
                  : row.rel == Relation::GreaterEqual ? 0.0 >= row.rhs - opts_.feas_tol
                                                      : std::abs(row.rhs) <= opts_.feas_tol;
        if (!ok) empty_row_infeasible_ = true;
        continue;
      }
      active_rows_.push_back(row);
    }
    m_ = static_cast<int>(active_rows_.size());
    if (opts_.max_iterations == 0) opts_.max_iterations = 50 * (n_ + static_cast<int>(lp.rows.size()));
    if (opts_.bland_after == 0) opts_.bland_after = 10 * (n_ + static_cast<int>(lp.rows.size()));

    total_ = n_ + 2 * m_;  // structural + slack + artificial
    cols_.assign(total_, {});
    lo_.assign(total_, 0.0);
    up_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    state_.assign(total_, VarState::AtLower);
    b_.assign(m_, 0.0);

    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      cost_[j] = lp.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      b_[i] = active_rows_[i].rhs;
      for (const auto& [j, v] : active_rows_[i].coeffs)
        if (v != 0.0) cols_[j].emplace_back(i, v);
      int s = n_ + i;  // slack
      cols_[s].emplace_back(i, 1.0);
      switch (active_rows_[i].rel) {
        case Relation::LessEqual: lo_[s] = 0.0; up_[s] = kInf; break;
        case Relation::GreaterEqual: lo_[s] = -kInf; up_[s] = 0.0; break;
        case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
      }
    }
  }

  LpSolution run() {
    LpSolution sol;
    if (empty_row_infeasible_) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    if (m_ == 0) return solve_bounds_only();

    init_nonbasic_values();
    install_artificial_basis();

    phase1_ = true;
    LpStatus st = iterate();
    if (st != LpStatus::Optimal)
      throw SolverError("phase-1 terminated abnormally");
    if (phase1_objective() > opts_.feas_tol) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iterations_;
      return sol;
    }
    purge_artificials();
    for (int i = 0; i < m_; ++i) {
      int a = n_ + m_ + i;
      lo_[a] = up_[a] = 0.0;  // artificials are frozen for phase 2
    }

    phase1_ = false;
    st = iterate();
    sol.iterations = iterations_;
    if (st == LpStatus::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }

    refactorize();  // final cleanup before reporting
    sol.status = LpStatus::Optimal;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.objective_value = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective_value += cost_[j] * x_[j];
    return sol;
  }

 private:
  void validate(const LinearProgram& lp) const {
    if (static_cast<int>(lp.objective.size()) != lp.n ||
        static_cast<int>(lp.lower.size()) != lp.n ||
        static_cast<int>(lp.upper.size()) != lp.n)
      throw SolverError("dimension mismatch: objective/bounds size != n");
    for (int j = 0; j < lp.n; ++j) {
      if (std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]) || std::isnan(lp.objective[j]))
        throw SolverError("NaN in variable data");
      if (lp.lower[j] > lp.upper[j])
        throw SolverError("variable x" + std::to_string(j) + " has lower > upper");
    }
    for (const auto& row : lp.rows) {
      if (std::isnan(row.rhs)) throw SolverError("NaN right-hand side");
      for (const auto& [j, v] : row.coeffs) {
        if (j < 0 || j >= lp.n)
          throw SolverError("row references variable " + std::to_string(j) +
                            " outside 0.." + std::to_string(lp.n - 1));
        if (std::isnan(v)) throw SolverError("NaN row coefficient");
      }
    }
  }

  LpSolution solve_bounds_only() {
    LpSolution sol;
    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (cost_[j] > 0.0) {
        if (lo_[j] == -kInf) { sol.status = LpStatus::Unbounded; sol.x.clear(); return sol; }
        sol.x[j] = lo_[j];
      } else if (cost_[j] < 0.0) {
        if (up_[j] == kInf) { sol.status = LpStatus::Unbounded; sol.x.clear(); return sol; }
        sol.x[j] = up_[j];
      } else {
        sol.x[j] = lo_[j] != -kInf ? lo_[j] : (up_[j] != kInf ? up_[j] : 0.0);
      }
      sol.objective_value += cost_[j] * sol.x[j];
    }
    sol.status = LpStatus::Optimal;
    return sol;
  }

  void init_nonbasic_values() {
    for (int j = 0; j < n_ + m_; ++j) {
      if (lo_[j] != -kInf) {
        x_[j] = lo_[j];
        state_[j] = VarState::AtLower;
      } else if (up_[j] != kInf) {
        x_[j] = up_[j];
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::FreeAtZero;
      }
    }
  }

  void install_artificial_basis() {
    basis_.assign(m_, -1);
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    std::vector<double> r = b_;
    for (int j = 0; j < n_ + m_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [ri, v] : cols_[j]) r[ri] -= v * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      int a = n_ + m_ + i;
      double sign = r[i] >= 0.0 ? 1.0 : -1.0;
      cols_[a].clear();
      cols_[a].emplace_back(i, sign);
      lo_[a] = 0.0;
      up_[a] = kInf;
      x_[a] = std::abs(r[i]);
      state_[a] = VarState::Basic;
      basis_[i] = a;
      binv_[static_cast<size_t>(i) * m_ + i] = sign;  // inverse of diag(sign)
    }
  }

  double phase1_objective() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_ + m_) s += x_[basis_[i]];
    return s;
  }

  double cost_of(int j) const {
    if (phase1_) return j >= n_ + m_ ? 1.0 : 0.0;
    return j < n_ ? cost_[j] : 0.0;
  }

  // y = c_B^T B^{-1}
  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      double cb = cost_of(basis_[k]);
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) y[i] += cb * row[i];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_of(j);
    for (const auto& [ri, v] : cols_[j]) d -= y[ri] * v;
    return d;
  }

  // w = B^{-1} A_j
  void ftran(int j, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    for (const auto& [ri, v] : cols_[j])
      for (int i = 0; i < m_; ++i) w[i] += binv_[static_cast<size_t>(i) * m_ + ri] * v;
  }

  void refactorize() {
    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    std::vector<double> dense(static_cast<size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k)
      for (const auto& [ri, v] : cols_[basis_[k]])
        dense[static_cast<size_t>(ri) * m_ + k] = v;
    std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<size_t>(i) * m_ + i] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(dense[static_cast<size_t>(col) * m_ + col]);
      for (int i = col + 1; i < m_; ++i) {
        double cand = std::abs(dense[static_cast<size_t>(i) * m_ + col]);
        if (cand > best) { best = cand; piv = i; }
      }
      if (best < 1e-12) throw SolverError("singular basis during refactorization");
      if (piv != col) {
        for (int j = 0; j < m_; ++j) {
          std::swap(dense[static_cast<size_t>(piv) * m_ + j], dense[static_cast<size_t>(col) * m_ + j]);
          std::swap(inv[static_cast<size_t>(piv) * m_ + j], inv[static_cast<size_t>(col) * m_ + j]);
        }
      }
      double d = dense[static_cast<size_t>(col) * m_ + col];
      for (int j = 0; j < m_; ++j) {
        dense[static_cast<size_t>(col) * m_ + j] /= d;
        inv[static_cast<size_t>(col) * m_ + j] /= d;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == col) continue;
        double f = dense[static_cast<size_t>(i) * m_ + col];
        if (f == 0.0) continue;
        for (int j = 0; j < m_; ++j) {
          dense[static_cast<size_t>(i) * m_ + j] -= f * dense[static_cast<size_t>(col) * m_ + j];
          inv[static_cast<size_t>(i) * m_ + j] -= f * inv[static_cast<size_t>(col) * m_ + j];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_basic_values();
  }

  void recompute_basic_values() {
    std::vector<double> r = b_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (const auto& [ri, v] : cols_[j]) r[ri] -= v * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double val = 0.0;
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) val += row[k] * r[k];
      x_[basis_[i]] = val;
    }
  }

  // Returns Optimal when no eligible entering column remains.
  LpStatus iterate() {
    std::vector<double> y, w;
    while (true) {
      if (iterations_ >= opts_.max_iterations)
        throw SolverError("iteration limit exceeded (" + std::to_string(opts_.max_iterations) +
                          "): possible numerical cycling");
      bool bland = iterations_ >= opts_.bland_after;
      compute_duals(y);

      int enter = -1;
      double enter_score = opts_.opt_tol;
      double enter_dir = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (lo_[j] == up_[j]) continue;  // fixed (equality slack, frozen artificial)
        double d = reduced_cost(j, y);
        double score;
        double dir;
        if (state_[j] == VarState::AtLower) {
          if (d >= -opts_.opt_tol) continue;
          score = -d; dir = 1.0;
        } else if (state_[j] == VarState::AtUpper) {
          if (d <= opts_.opt_tol) continue;
          score = d; dir = -1.0;
        } else {  // free at zero
          if (std::abs(d) <= opts_.opt_tol) continue;
          score = std::abs(d); dir = d < 0.0 ? 1.0 : -1.0;
        }
        if (bland) { enter = j; enter_dir = dir; break; }
        if (score > enter_score) { enter = j; enter_score = score; enter_dir = dir; }
      }
      if (enter < 0) return LpStatus::Optimal;

      ftran(enter, w);

      // Ratio test: entering moves by t >= 0 in direction enter_dir.
      constexpr double kPivotEps = 1e-9;
      constexpr double kTieTol = 1e-10;
      double t_limit = (lo_[enter] != -kInf && up_[enter] != kInf) ? up_[enter] - lo_[enter] : kInf;
      int leave_pos = -1;      // -1 means bound flip
      double leave_to = 0.0;   // bound the leaving variable lands on
      for (int i = 0; i < m_; ++i) {
        double step = enter_dir * w[i];
        if (std::abs(step) <= kPivotEps) continue;
        int bj = basis_[i];
        double lim;
        double target;
        if (step > 0.0) {
          if (lo_[bj] == -kInf) continue;
          lim = (x_[bj] - lo_[bj]) / step;
          target = lo_[bj];
        } else {
          if (up_[bj] == kInf) continue;
          lim = (x_[bj] - up_[bj]) / step;
          target = up_[bj];
        }
        if (lim < 0.0) lim = 0.0;  // guards fp drift on degenerate bases
        bool better;
        if (lim < t_limit - kTieTol) {
          better = true;
        } else if (lim <= t_limit + kTieTol && leave_pos >= 0) {
          better = bland ? bj < basis_[leave_pos]
                         : std::abs(w[i]) > std::abs(w[leave_pos]);
        } else {
          better = false;
        }
        if (better) { t_limit = lim; leave_pos = i; leave_to = target; }
      }

      if (t_limit == kInf) {
        if (phase1_) throw SolverError("unbounded phase-1 objective: numerical failure");
        return LpStatus::Unbounded;
      }

      ++iterations_;
      if (leave_pos < 0) {
        // Bound flip: entering jumps to its opposite bound, basis unchanged.
        x_[enter] += enter_dir * t_limit;
        state_[enter] = enter_dir > 0.0 ? VarState::AtUpper : VarState::AtLower;
        x_[enter] = enter_dir > 0.0 ? up_[enter] : lo_[enter];  // snap exactly
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= t_limit * enter_dir * w[i];
        continue;
      }

      int leave = basis_[leave_pos];
      for (int i = 0; i < m_; ++i)
        if (i != leave_pos) x_[basis_[i]] -= t_limit * enter_dir * w[i];
      x_[enter] += enter_dir * t_limit;
      x_[leave] = leave_to;  // snap exactly onto the bound it leaves at
      state_[leave] = leave_to == lo_[leave] ? VarState::AtLower : VarState::AtUpper;
      state_[enter] = VarState::Basic;
      basis_[leave_pos] = enter;
      pivot_binv(leave_pos, w);

      if (++pivots_since_refactor_ >= 64) {
        refactorize();
        pivots_since_refactor_ = 0;
      }
    }
  }

  // B_new^{-1} = E B^{-1} where E is the elementary matrix for column w at row r.
  void pivot_binv(int r, const std::vector<double>& w) {
    double piv = w[r];
    if (std::abs(piv) < 1e-12) throw SolverError("zero pivot during basis update");
    double* rowr = &binv_[static_cast<size_t>(r) * m_];
    for (int j = 0; j < m_; ++j) rowr[j] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = w[i];
      if (f == 0.0) continue;
      double* rowi = &binv_[static_cast<size_t>(i) * m_];
      for (int j = 0; j < m_; ++j) rowi[j] -= f * rowr[j];
    }
  }

  // Drives basic artificials out with degenerate pivots where possible.
  void purge_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_ + m_) continue;
      int best = -1;
      double best_mag = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == up_[j]) continue;
        double alpha = 0.0;
        const double* rowr = &binv_[static_cast<size_t>(r) * m_];
        for (const auto& [ri, v] : cols_[j]) alpha += rowr[ri] * v;
        if (std::abs(alpha) > best_mag) { best_mag = std::abs(alpha); best = j; }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at zero
      std::vector<double> w;
      ftran(best, w);
      int art = basis_[r];
      double keep = x_[best];
      x_[art] = 0.0;
      state_[art] = VarState::AtLower;
      state_[best] = VarState::Basic;
      basis_[r] = best;
      pivot_binv(r, w);
      x_[best] = keep;  // degenerate pivot: values are unchanged
    }
  }

  SimplexOptions opts_;
  int n_ = 0;
  int m_ = 0;
  int total_ = 0;
  bool phase1_ = true;
  bool empty_row_infeasible_ = false;
  std::vector<Row> active_rows_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, up_, cost_, x_, b_;
  std::vector<double> binv_;
  std::vector<int> basis_;
  std::vector<VarState> state_;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  Simplex simplex(lp, opts);
  LpSolution sol = simplex.run();
  if (sol.status == LpStatus::Optimal) {
    std::string why;
    if (!check_feasible(lp, sol.x, opts.feas_tol, &why))
      throw SolverError("numerical failure: reported optimum is infeasible (" + why + ")");
  }
  return sol;
}

}  // namespace mgems::lp
