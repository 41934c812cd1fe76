#include "metlearn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metlearn/kernels.hpp"

namespace metlearn {

namespace {
constexpr double kPivTol = 1e-9;
constexpr double kPivWeak = 1e-11;
constexpr double kDropTol = 1e-12;  // skip tableau updates below this magnitude
}  // namespace

BoundedSimplex::BoundedSimplex(const MilpModel& model, const std::vector<int>& active_rows,
                               const std::vector<double>& lower, const std::vector<double>& upper,
                               const SimplexOptions& opt)
    : model_(model), opt_(opt) {
  const double sense = model.maximize ? 1.0 : -1.0;

  col_of_var_.assign(model.num_vars, -1);
  fixed_value_.assign(model.num_vars, 0.0);
  for (int j = 0; j < model.num_vars; ++j) {
    if (lower[j] >= upper[j]) {
      fixed_value_[j] = lower[j];
    } else {
      col_of_var_[j] = static_cast<int>(avars_.size());
      avars_.push_back(j);
    }
  }
  nstruct_ = static_cast<int>(avars_.size());

  // Constant rows (all variables folded) are checked up front; the rest get a
  // logical column. Rows are scaled to unit max |coefficient|.
  std::vector<int> rows;
  std::vector<double> rhs_after_fold;
  std::vector<double> scale;
  constant_infeasible_ = false;
  for (int rid : active_rows) {
    const Row& row = model.rows[rid];
    double fold = 0.0;
    double maxc = 0.0;
    bool any_active = false;
    for (const RowTerm& t : row.terms) {
      if (col_of_var_[t.var] < 0) {
        fold += t.coef * fixed_value_[t.var];
      } else {
        any_active = true;
        maxc = std::max(maxc, std::fabs(t.coef));
      }
    }
    double b = row.rhs - fold;
    if (!any_active) {
      double tol = opt.feas_tol * std::max(1.0, std::fabs(row.rhs));
      bool ok = (row.rel == Rel::kLe && 0.0 <= b + tol) ||
                (row.rel == Rel::kGe && 0.0 >= b - tol) ||
                (row.rel == Rel::kEq && std::fabs(b) <= tol);
      if (!ok) constant_infeasible_ = true;
      continue;
    }
    rows.push_back(rid);
    scale.push_back(1.0 / std::clamp(maxc, 1e-8, 1e8));
    rhs_after_fold.push_back(b);
  }
  m_ = static_cast<int>(rows.size());
  nlogical_ = m_;

  // Nonbasic structural start: lower bound when finite, else upper, else free.
  std::vector<double> start(nstruct_, 0.0);
  state_.assign(nstruct_ + 2 * m_, kAtLower);  // resized below once n_art known
  lo_.assign(nstruct_, 0.0);
  up_.assign(nstruct_, 0.0);
  cost_.assign(nstruct_, 0.0);
  for (int c = 0; c < nstruct_; ++c) {
    int j = avars_[c];
    lo_[c] = lower[j];
    up_[c] = upper[j];
    cost_[c] = sense * model.objective[j];
    if (std::isfinite(lo_[c])) {
      state_[c] = kAtLower;
      start[c] = lo_[c];
    } else if (std::isfinite(up_[c])) {
      state_[c] = kAtUpper;
      start[c] = up_[c];
    } else {
      state_[c] = kFree;
      start[c] = 0.0;
    }
  }
  fixed_obj_ = 0.0;
  for (int j = 0; j < model.num_vars; ++j)
    if (col_of_var_[j] < 0) fixed_obj_ += model.objective[j] * fixed_value_[j];

  // Residuals decide which rows need an artificial column.
  std::vector<double> residual(m_, 0.0);
  std::vector<char> needs_art(m_, 0);
  scaled_rhs_.assign(m_, 0.0);
  int n_art = 0;
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.rows[rows[r]];
    double act = 0.0;
    for (const RowTerm& t : row.terms) {
      int c = col_of_var_[t.var];
      if (c >= 0) act += t.coef * start[c];
    }
    scaled_rhs_[r] = scale[r] * rhs_after_fold[r];
    residual[r] = scale[r] * (rhs_after_fold[r] - act);
    bool feasible_logical = (row.rel == Rel::kLe && residual[r] >= 0.0) ||
                            (row.rel == Rel::kGe && residual[r] <= 0.0) ||
                            (row.rel == Rel::kEq && residual[r] == 0.0);
    if (!feasible_logical) {
      needs_art[r] = 1;
      ++n_art;
    }
  }

  art_start_ = nstruct_ + nlogical_;
  ncols_ = art_start_ + n_art;
  lo_.resize(ncols_);
  up_.resize(ncols_);
  cost_.resize(ncols_, 0.0);
  phase1_cost_.assign(ncols_, 0.0);
  state_.assign(ncols_, kAtLower);
  for (int c = 0; c < nstruct_; ++c) {
    int j = avars_[c];
    if (std::isfinite(lower[j])) {
      state_[c] = kAtLower;
    } else if (std::isfinite(upper[j])) {
      state_[c] = kAtUpper;
    } else {
      state_[c] = kFree;
    }
  }

  tableau_.assign(static_cast<std::size_t>(m_) * ncols_, 0.0);
  basis_.assign(m_, -1);
  xb_.assign(m_, 0.0);
  int art = 0;
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.rows[rows[r]];
    double* tr = row_ptr(r);
    for (const RowTerm& t : row.terms) {
      int c = col_of_var_[t.var];
      if (c >= 0) tr[c] = scale[r] * t.coef;
    }
    int lc = nstruct_ + r;
    tr[lc] = 1.0;
    switch (row.rel) {
      case Rel::kLe: lo_[lc] = 0.0; up_[lc] = kInf; break;
      case Rel::kGe: lo_[lc] = -kInf; up_[lc] = 0.0; break;
      case Rel::kEq: lo_[lc] = 0.0; up_[lc] = 0.0; break;
    }
    if (!needs_art[r]) {
      basis_[r] = lc;
      state_[lc] = kBasic;
      xb_[r] = residual[r];
    } else {
      state_[lc] = (row.rel == Rel::kGe) ? kAtUpper : kAtLower;
      int ac = art_start_ + art++;
      double sigma = residual[r] >= 0 ? 1.0 : -1.0;
      tr[ac] = sigma;
      lo_[ac] = 0.0;
      up_[ac] = kInf;
      phase1_cost_[ac] = -1.0;
      basis_[r] = ac;
      state_[ac] = kBasic;
      xb_[r] = std::fabs(residual[r]);
    }
  }
  has_artificials_ = n_art > 0;
  reduced_.assign(ncols_, 0.0);
  col_scratch_.assign(m_, 0.0);

  double cmax = 0.0;
  for (double c : cost_) cmax = std::max(cmax, std::fabs(c));
  dual_tol_ = 1e-9 * (1.0 + cmax);
}

double BoundedSimplex::nonbasic_value(int col) const {
  switch (state_[col]) {
    case kAtLower: return lo_[col];
    case kAtUpper: return up_[col];
    case kFree: return 0.0;
    case kBasic: break;
  }
  return 0.0;
}

double BoundedSimplex::current_objective() const {
  const std::vector<double>& c = active_cost();
  double v = 0.0;
  for (int r = 0; r < m_; ++r) v += c[basis_[r]] * xb_[r];
  for (int j = 0; j < ncols_; ++j)
    if (state_[j] != kBasic && c[j] != 0.0) v += c[j] * nonbasic_value(j);
  return v;
}

void BoundedSimplex::compute_reduced_costs() {
  const std::vector<double>& c = active_cost();
  reduced_ = c;
  for (int r = 0; r < m_; ++r) {
    double cb = c[basis_[r]];
    if (cb != 0.0) kernels::axpy(-cb, row_ptr(r), reduced_.data(), ncols_);
  }
}

void BoundedSimplex::recompute_basics() {
  // Logical columns of the tableau carry B^-1, so basic values can be rebuilt
  // exactly from the scaled right-hand sides and the nonbasic values.
  std::vector<double> adj = scaled_rhs_;
  for (int r = 0; r < m_; ++r) xb_[r] = 0.0;
  for (int r = 0; r < m_; ++r) {
    const double* tr = row_ptr(r);
    double v = 0.0;
    for (int k = 0; k < m_; ++k) v += tr[nstruct_ + k] * adj[k];
    xb_[r] = v;
  }
  for (int j = 0; j < ncols_; ++j) {
    if (state_[j] == kBasic) continue;
    double val = nonbasic_value(j);
    if (val == 0.0) continue;
    for (int r = 0; r < m_; ++r) xb_[r] -= row_ptr(r)[j] * val;
  }
}

int BoundedSimplex::price(bool bland) const {
  int best = -1;
  double best_score = dual_tol_;
  for (int j = 0; j < ncols_; ++j) {
    if (state_[j] == kBasic) continue;
    if (lo_[j] >= up_[j]) continue;  // fixed
    double d = reduced_[j];
    double score = 0.0;
    switch (state_[j]) {
      case kAtLower: score = d; break;           // increasing improves if d > 0
      case kAtUpper: score = -d; break;          // decreasing improves if d < 0
      case kFree: score = std::fabs(d); break;
      case kBasic: break;
    }
    if (score <= dual_tol_) continue;
    if (bland) return j;
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

LpStatus BoundedSimplex::iterate(long budget) {
  long stall = 0;
  long bland_left = 0;
  double last_obj = current_objective();
  const long stall_limit = std::max<long>(500, 2L * m_ + nstruct_);

  for (long it = 0; it < budget; ++it, ++iters_) {
    if ((iters_ & 0x0fff) == 0x0fff) {
      recompute_basics();
      compute_reduced_costs();
    }
    int q = price(bland_left > 0);
    if (q < 0) {
      // Recompute exactly and retry once; guards against drifted costs.
      compute_reduced_costs();
      q = price(bland_left > 0);
      if (q < 0) return LpStatus::kOptimal;
    }
    double sigma;
    switch (state_[q]) {
      case kAtLower: sigma = 1.0; break;
      case kAtUpper: sigma = -1.0; break;
      default: sigma = reduced_[q] > 0 ? 1.0 : -1.0; break;
    }

    for (int r = 0; r < m_; ++r) col_scratch_[r] = row_ptr(r)[q];

    // Ratio test: smallest step that drives a basic variable to a bound, or
    // the entering variable to its opposite bound.
    double t_own = up_[q] - lo_[q];  // +inf when unbounded span
    double t_best = t_own;
    int leave_row = -1;
    double leave_alpha = 0.0;
    bool leave_at_upper = false;
    for (int r = 0; r < m_; ++r) {
      double alpha = col_scratch_[r];
      if (std::fabs(alpha) <= kPivWeak) continue;
      int b = basis_[r];
      double move = sigma * alpha;  // basic value changes by -move * t
      double t;
      bool to_upper;
      if (move > 0) {
        if (!std::isfinite(lo_[b])) continue;
        t = (xb_[r] - lo_[b]) / move;
        to_upper = false;
      } else {
        if (!std::isfinite(up_[b])) continue;
        t = (xb_[r] - up_[b]) / move;
        to_upper = true;
      }
      if (t < 0) t = 0;
      double slack_tol = 1e-9 * (1.0 + std::fabs(t_best));
      bool better = t < t_best - slack_tol;
      bool tie = !better && t <= t_best + slack_tol && leave_row >= 0;
      bool stronger_pivot = tie && std::fabs(alpha) > std::fabs(leave_alpha) + 1e-12;
      if (better || (tie && stronger_pivot) || (leave_row < 0 && t < t_best)) {
        t_best = t;
        leave_row = r;
        leave_alpha = alpha;
        leave_at_upper = to_upper;
      }
    }

    if (!std::isfinite(t_best)) {
      // Unbounded: build the structural ray.
      ray_.assign(model_.num_vars, 0.0);
      if (q < nstruct_) ray_[avars_[q]] = sigma;
      for (int r = 0; r < m_; ++r) {
        int b = basis_[r];
        if (b < nstruct_ && std::fabs(col_scratch_[r]) > kDropTol)
          ray_[avars_[b]] = -sigma * col_scratch_[r];
      }
      return LpStatus::kUnbounded;
    }

    if (leave_row < 0 || t_own <= t_best) {
      // Bound flip: the entering variable crosses its box, basis unchanged.
      double t = t_own;
      for (int r = 0; r < m_; ++r) {
        if (col_scratch_[r] != 0.0) xb_[r] -= sigma * t * col_scratch_[r];
      }
      state_[q] = state_[q] == kAtLower ? kAtUpper : kAtLower;
    } else {
      double t = t_best;
      // Reject tiny pivots when a cleaner alternative is unavailable only by
      // accepting them anyway: leave_alpha magnitude was maximized over ties.
      double piv = leave_alpha;
      if (std::fabs(piv) < kPivTol && std::fabs(piv) < kPivWeak) {
        return LpStatus::kIterLimit;  // numerically stuck
      }
      double* pr = row_ptr(leave_row);
      kernels::scale(1.0 / piv, pr, ncols_);
      double enter_val = nonbasic_value(q) + sigma * t;
      for (int r = 0; r < m_; ++r) {
        if (r == leave_row) continue;
        double alpha = col_scratch_[r];
        if (std::fabs(alpha) <= kDropTol) continue;
        kernels::axpy(-alpha, pr, row_ptr(r), ncols_);
        xb_[r] -= sigma * t * alpha;
      }
      double dq = reduced_[q];
      if (std::fabs(dq) > kDropTol) kernels::axpy(-dq, pr, reduced_.data(), ncols_);

      int leaving = basis_[leave_row];
      state_[leaving] = leave_at_upper ? kAtUpper : kAtLower;
      if (leaving >= art_start_) {
        lo_[leaving] = up_[leaving] = 0.0;  // retire artificial columns for good
      }
      basis_[leave_row] = q;
      state_[q] = kBasic;
      xb_[leave_row] = enter_val;
    }

    if (bland_left > 0) --bland_left;
    double obj = current_objective();
    if (obj > last_obj + 1e-10 * (1.0 + std::fabs(last_obj))) {
      last_obj = obj;
      stall = 0;
    } else if (++stall > stall_limit) {
      bland_left = stall_limit * 4;
      stall = 0;
    }
  }
  return LpStatus::kIterLimit;
}

LpStatus BoundedSimplex::solve() {
  if (constant_infeasible_) return LpStatus::kInfeasible;
  if (m_ == 0) {
    // Pure bound problem: push every structural variable toward its
    // profitable bound; unbounded when an improving direction has no bound.
    objective_ = fixed_obj_;
    const double sense = model_.maximize ? 1.0 : -1.0;
    for (int c = 0; c < nstruct_; ++c) {
      double cd = cost_[c];
      if (cd > 0) {
        if (!std::isfinite(up_[c])) {
          ray_.assign(model_.num_vars, 0.0);
          ray_[avars_[c]] = 1.0;
          return LpStatus::kUnbounded;
        }
        state_[c] = kAtUpper;
      } else if (cd < 0) {
        if (!std::isfinite(lo_[c])) {
          ray_.assign(model_.num_vars, 0.0);
          ray_[avars_[c]] = -1.0;
          return LpStatus::kUnbounded;
        }
        state_[c] = kAtLower;
      }
      objective_ += sense * cd * nonbasic_value(c);
    }
    return LpStatus::kOptimal;
  }

  if (has_artificials_) {
    in_phase1_ = true;
    compute_reduced_costs();
    LpStatus s = iterate(opt_.iteration_limit);
    if (s == LpStatus::kUnbounded) return LpStatus::kIterLimit;  // cannot happen; be safe
    if (s == LpStatus::kIterLimit && iters_ >= opt_.iteration_limit) return LpStatus::kIterLimit;
    double infeas = -current_objective();
    if (infeas > opt_.feas_tol * (1.0 + std::fabs(infeas))) {
      in_phase1_ = false;
      return LpStatus::kInfeasible;
    }
    for (int j = art_start_; j < ncols_; ++j) lo_[j] = up_[j] = 0.0;
    in_phase1_ = false;
  }

  compute_reduced_costs();
  LpStatus s = iterate(opt_.iteration_limit - iters_);
  if (s == LpStatus::kOptimal) {
    recompute_basics();
  }
  const double sense = model_.maximize ? 1.0 : -1.0;
  objective_ = sense * current_objective() + fixed_obj_;
  return s;
}

std::vector<double> BoundedSimplex::solution() const {
  std::vector<double> x = fixed_value_;
  for (int c = 0; c < nstruct_; ++c) x[avars_[c]] = nonbasic_value(c);
  for (int r = 0; r < m_; ++r) {
    int b = basis_[r];
    if (b < nstruct_) x[avars_[b]] = xb_[r];
  }
  return x;
}

}  // namespace metlearn
