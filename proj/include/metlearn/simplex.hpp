#pragma once

// Bounded-variable primal simplex on a dense row-major tableau.
//
// Rows are scaled to unit max coefficient, converted to equalities with one
// logical column each, and infeasible starts get artificial columns driven
// out by a phase-1 objective. Pricing is Dantzig with a Bland fallback after
// stall detection; the ratio test handles bound flips for boxed variables and
// free variables entering at zero. Reduced costs and basic values are
// periodically recomputed from the tableau to bound drift.

#include <vector>

#include "metlearn/milp.hpp"

namespace metlearn {

struct SimplexOptions {
  double feas_tol = 1e-7;
  long iteration_limit = 2000000;
};

class BoundedSimplex {
 public:
  // Solves max c'x over the given subset of model rows with the supplied
  // variable bounds (callers override model bounds for branching). Variables
  // with lb == ub are folded into the right-hand sides.
  BoundedSimplex(const MilpModel& model, const std::vector<int>& active_rows,
                 const std::vector<double>& lower, const std::vector<double>& upper,
                 const SimplexOptions& opt);

  LpStatus solve();

  // Model-sense objective value of the final point.
  double objective() const { return objective_; }
  // Structural solution, fixed variables included.
  std::vector<double> solution() const;
  // Improving direction in structural space when status is unbounded.
  const std::vector<double>& ray() const { return ray_; }
  long iterations() const { return iters_; }

 private:
  enum State : char { kBasic, kAtLower, kAtUpper, kFree };

  double nonbasic_value(int col) const;
  void compute_reduced_costs();
  void recompute_basics();
  int price(bool bland) const;
  LpStatus iterate(long budget);

  const MilpModel& model_;
  SimplexOptions opt_;

  std::vector<int> avars_;       // structural column -> model variable
  std::vector<int> col_of_var_;  // model variable -> structural column or -1
  std::vector<double> fixed_value_;  // value for folded variables

  int m_ = 0;        // active rows
  int nstruct_ = 0;  // structural columns
  int ncols_ = 0;    // structural + logical + artificial
  int nlogical_ = 0;
  int art_start_ = 0;
  bool has_artificials_ = false;
  bool constant_infeasible_ = false;
  double fixed_obj_ = 0.0;
  double dual_tol_ = 1e-9;

  std::vector<double> tableau_;  // m_ x ncols_
  std::vector<double> lo_, up_, cost_, phase1_cost_;
  std::vector<double> reduced_;
  std::vector<double> xb_;       // basic values by row
  std::vector<int> basis_;       // row -> column
  std::vector<State> state_;
  std::vector<double> scaled_rhs_;
  std::vector<double> col_scratch_;

  bool in_phase1_ = false;
  double objective_ = 0.0;
  long iters_ = 0;
  std::vector<double> ray_;

  double* row_ptr(int r) { return &tableau_[static_cast<std::size_t>(r) * ncols_]; }
  const double* row_ptr(int r) const { return &tableau_[static_cast<std::size_t>(r) * ncols_]; }
  const std::vector<double>& active_cost() const { return in_phase1_ ? phase1_cost_ : cost_; }
  double current_objective() const;
};

}  // namespace metlearn
