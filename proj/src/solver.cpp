#include "metlearn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>

#include "metlearn/simplex.hpp"

namespace metlearn {

namespace {

LpSolution finish_lp(const MilpModel& m, BoundedSimplex& spx, LpStatus status) {
  LpSolution out;
  out.status = status;
  out.iterations = spx.iterations();
  if (status == LpStatus::kOptimal) {
    out.x = spx.solution();
    out.objective = spx.objective();
    out.row_activity.reserve(m.rows.size());
    for (const Row& r : m.rows) out.row_activity.push_back(row_activity(r, out.x));
  }
  return out;
}

double row_violation(const Row& row, double act) {
  double scale = std::max(1.0, std::fabs(row.rhs));
  double v = 0.0;
  switch (row.rel) {
    case Rel::kLe: v = act - row.rhs; break;
    case Rel::kGe: v = row.rhs - act; break;
    case Rel::kEq: v = std::fabs(act - row.rhs); break;
  }
  return v / scale;
}

}  // namespace

LpSolution solve_lp_bounds(const MilpModel& m, const SolverParams& p,
                           const std::vector<double>& lower, const std::vector<double>& upper) {
  SimplexOptions opt;
  opt.feas_tol = p.feas_tol;
  opt.iteration_limit = p.lp_iteration_limit;

  const int nrows = static_cast<int>(m.rows.size());
  if (nrows <= p.lazy_row_threshold) {
    std::vector<int> all(nrows);
    for (int r = 0; r < nrows; ++r) all[r] = r;
    BoundedSimplex spx(m, all, lower, upper, opt);
    return finish_lp(m, spx, spx.solve());
  }

  // Lazy activation: solve over a growing subset; a solution is only accepted
  // once every row of the full model is satisfied. A subset is a relaxation,
  // so subset infeasibility proves model infeasibility, and an unbounded
  // subset ray either violates an inactive row (which then joins) or proves
  // the model unbounded.
  std::vector<char> active(nrows, 0);
  std::vector<int> active_ids;
  for (int r = 0; r < nrows; ++r) {
    if (m.rows[r].rel == Rel::kEq) {
      active[r] = 1;
      active_ids.push_back(r);
    }
  }
  long total_iters = 0;
  const int max_rounds = 0x7fffffff;
  for (int round = 0; round < max_rounds; ++round) {
    BoundedSimplex spx(m, active_ids, lower, upper, opt);
    LpStatus s = spx.solve();
    total_iters += spx.iterations();
    if (s == LpStatus::kInfeasible || s == LpStatus::kIterLimit) {
      LpSolution out = finish_lp(m, spx, s);
      out.iterations = total_iters;
      return out;
    }
    std::vector<std::pair<double, int>> add;  // (-violation, row)
    if (s == LpStatus::kUnbounded) {
      const std::vector<double>& ray = spx.ray();
      for (int r = 0; r < nrows; ++r) {
        if (active[r]) continue;
        double along = row_activity(m.rows[r], ray);
        bool cuts = (m.rows[r].rel == Rel::kLe && along > 1e-9) ||
                    (m.rows[r].rel == Rel::kGe && along < -1e-9) ||
                    (m.rows[r].rel == Rel::kEq && std::fabs(along) > 1e-9);
        if (cuts) add.emplace_back(-std::fabs(along), r);
      }
      if (add.empty()) {
        LpSolution out = finish_lp(m, spx, LpStatus::kUnbounded);
        out.iterations = total_iters;
        return out;
      }
    } else {
      std::vector<double> x = spx.solution();
      for (int r = 0; r < nrows; ++r) {
        if (active[r]) continue;
        double v = row_violation(m.rows[r], row_activity(m.rows[r], x));
        if (v > p.feas_tol) add.emplace_back(-v, r);
      }
      if (add.empty()) {
        LpSolution out = finish_lp(m, spx, LpStatus::kOptimal);
        out.iterations = total_iters;
        return out;
      }
    }
    std::sort(add.begin(), add.end());
    int take = std::min<int>(static_cast<int>(add.size()), p.lazy_batch);
    for (int k = 0; k < take; ++k) {
      active[add[k].second] = 1;
      active_ids.push_back(add[k].second);
    }
    std::sort(active_ids.begin(), active_ids.end());
  }
  throw std::logic_error("lazy row loop failed to terminate");
}

LpSolution solve_lp(const MilpModel& m, const SolverParams& p) {
  return solve_lp_bounds(m, p, m.lower, m.upper);
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

namespace {

struct BoundChange {
  int var;
  double lb, ub;
};

struct Node {
  double bound;  // parent LP bound; valid upper bound for this subtree (max)
  long id = 0;
  int depth = 0;
  std::vector<BoundChange> changes;
};

struct NodeCompare {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // larger bound first
    return a.id > b.id;                                // then older nodes
  }
};

struct PseudoCost {
  std::vector<double> up_sum, down_sum;
  std::vector<long> up_cnt, down_cnt;
  void init(int n) {
    up_sum.assign(n, 0.0);
    down_sum.assign(n, 0.0);
    up_cnt.assign(n, 0);
    down_cnt.assign(n, 0);
  }
  void record(int var, bool up, double degradation, double frac_dist) {
    if (frac_dist < 1e-9) return;
    double unit = std::max(degradation, 0.0) / frac_dist;
    if (up) {
      up_sum[var] += unit;
      up_cnt[var] += 1;
    } else {
      down_sum[var] += unit;
      down_cnt[var] += 1;
    }
  }
  double estimate(int var, bool up) const {
    long c = up ? up_cnt[var] : down_cnt[var];
    if (c == 0) return 1.0;
    return (up ? up_sum[var] : down_sum[var]) / c;
  }
};

struct SearchState {
  std::mutex mu;
  std::condition_variable cv;
  std::priority_queue<Node, std::vector<Node>, NodeCompare> best_bound_q;
  std::vector<Node> dfs_stack;
  int in_flight = 0;
  long next_id = 1;
  long nodes_explored = 0;
  long lp_iterations = 0;
  long unresolved = 0;
  bool has_incumbent = false;
  std::vector<double> incumbent;
  double incumbent_obj = -kInf;
  bool stop = false;
  PseudoCost pcost;
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& m, const SolverParams& p) : m_(m), p_(p) {
    int_vars_.clear();
    for (int j = 0; j < m.num_vars; ++j)
      if (m.is_integer[j]) int_vars_.push_back(j);
  }

  MilpSolution run(const std::vector<double>* start) {
    auto t0 = std::chrono::steady_clock::now();
    m_.check_structure();
    p_.check();
    st_.pcost.init(m_.num_vars);

    MilpSolution out;
    if (start) {
      std::vector<double> x = *start;
      for (int j : int_vars_) x[j] = std::round(x[j]);
      if (validate(m_, x, 10 * p_.feas_tol).feasible()) {
        st_.has_incumbent = true;
        st_.incumbent = x;
        st_.incumbent_obj = objective_of(x);
      }
    }

    Node root;
    root.bound = kInf;
    root.id = 0;
    push_node(std::move(root));

    int workers = std::max(1, p_.threads);
    if (workers == 1) {
      worker(t0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back([this, t0] { worker(t0); });
      for (auto& t : pool) t.join();
    }

    out.nodes = st_.nodes_explored;
    out.lp_iterations = st_.lp_iterations;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double open_bound = open_bound_unlocked();
    if (st_.has_incumbent) {
      out.x = st_.incumbent;
      out.objective = st_.incumbent_obj;
      out.best_bound = std::max(st_.incumbent_obj, open_bound);
      out.rel_gap = (out.best_bound - out.objective) / std::max(1.0, std::fabs(out.objective));
      bool exhausted = !has_open_nodes() && st_.unresolved == 0;
      out.status = (exhausted || out.rel_gap <= p_.rel_gap_tol) ? MilpStatus::kOptimal
                                                                : MilpStatus::kFeasible;
    } else if (!has_open_nodes() && st_.unresolved == 0 && !hit_limits_) {
      out.status = MilpStatus::kInfeasible;
      out.best_bound = -kInf;
    } else {
      out.status = MilpStatus::kLimit;
      out.best_bound = open_bound;
    }
    return out;
  }

 private:
  double objective_of(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < m_.num_vars; ++j) v += m_.objective[j] * x[j];
    return v;
  }

  bool has_open_nodes() {
    return p_.node_order == NodeOrder::kBestBound ? !st_.best_bound_q.empty()
                                                  : !st_.dfs_stack.empty();
  }

  double open_bound_unlocked() {
    if (p_.node_order == NodeOrder::kBestBound)
      return st_.best_bound_q.empty() ? -kInf : st_.best_bound_q.top().bound;
    double b = -kInf;
    for (const Node& n : st_.dfs_stack) b = std::max(b, n.bound);
    return b;
  }

  void push_node(Node n) {
    if (p_.node_order == NodeOrder::kBestBound)
      st_.best_bound_q.push(std::move(n));
    else
      st_.dfs_stack.push_back(std::move(n));
  }

  std::optional<Node> pop_node() {
    if (p_.node_order == NodeOrder::kBestBound) {
      if (st_.best_bound_q.empty()) return std::nullopt;
      Node n = st_.best_bound_q.top();
      st_.best_bound_q.pop();
      return n;
    }
    if (st_.dfs_stack.empty()) return std::nullopt;
    Node n = std::move(st_.dfs_stack.back());
    st_.dfs_stack.pop_back();
    return n;
  }

  void materialize_bounds(const Node& n, std::vector<double>& lo, std::vector<double>& up) const {
    lo = m_.lower;
    up = m_.upper;
    for (const BoundChange& c : n.changes) {
      lo[c.var] = std::max(lo[c.var], c.lb);
      up[c.var] = std::min(up[c.var], c.ub);
    }
  }

  double prune_eps() const {
    double inc = st_.incumbent_obj;
    return st_.has_incumbent ? p_.rel_gap_tol * std::max(1.0, std::fabs(inc)) : kInf;
  }

  // Round the LP point's integers, fix them, and re-solve the continuous part.
  void rounding_heuristic(const std::vector<double>& x_lp) {
    std::vector<double> lo = m_.lower, up = m_.upper;
    for (int j : int_vars_) {
      double v = std::clamp(std::round(x_lp[j]), m_.lower[j], m_.upper[j]);
      lo[j] = up[j] = v;
    }
    LpSolution fixed = solve_lp_bounds(m_, p_, lo, up);
    if (fixed.status != LpStatus::kOptimal) return;
    std::lock_guard<std::mutex> lk(st_.mu);
    st_.lp_iterations += fixed.iterations;
    if (!st_.has_incumbent || fixed.objective > st_.incumbent_obj + 1e-12) {
      st_.has_incumbent = true;
      st_.incumbent = fixed.x;
      st_.incumbent_obj = fixed.objective;
    }
  }

  int pick_branch_var(const std::vector<double>& x, const std::vector<double>& lo,
                      const std::vector<double>& up) {
    int best = -1;
    int best_prio = std::numeric_limits<int>::min();
    double best_score = -1.0;
    for (int j : int_vars_) {
      if (lo[j] >= up[j]) continue;
      double frac = x[j] - std::floor(x[j]);
      if (frac < p_.int_tol || frac > 1.0 - p_.int_tol) continue;
      int prio = m_.branch_priority.empty() ? 0 : m_.branch_priority[j];
      double score;
      if (p_.branch_rule == BranchRule::kPseudoCost) {
        double up_est = st_.pcost.estimate(j, true) * (1.0 - frac);
        double dn_est = st_.pcost.estimate(j, false) * frac;
        score = std::min(up_est, dn_est);
      } else {
        score = 0.5 - std::fabs(frac - 0.5);  // closeness to one half
      }
      if (prio > best_prio || (prio == best_prio && score > best_score + 1e-15)) {
        best_prio = prio;
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void worker(std::chrono::steady_clock::time_point t0) {
    std::unique_lock<std::mutex> lk(st_.mu);
    for (;;) {
      st_.cv.wait(lk, [&] { return st_.stop || has_open_nodes() || st_.in_flight == 0; });
      if (st_.stop || (!has_open_nodes() && st_.in_flight == 0)) {
        st_.cv.notify_all();
        return;
      }
      if (!has_open_nodes()) continue;

      if (p_.node_limit >= 0 && st_.nodes_explored >= p_.node_limit) {
        hit_limits_ = true;
        st_.stop = true;
        st_.cv.notify_all();
        return;
      }
      if (!p_.deterministic && p_.time_limit >= 0) {
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (el > p_.time_limit) {
          hit_limits_ = true;
          st_.stop = true;
          st_.cv.notify_all();
          return;
        }
      }

      Node node = *pop_node();
      if (st_.has_incumbent && node.bound <= st_.incumbent_obj + prune_eps()) {
        continue;  // bound pruning
      }
      st_.in_flight += 1;
      st_.nodes_explored += 1;
      long nodes_so_far = st_.nodes_explored;
      bool has_inc = st_.has_incumbent;
      double inc_obj = st_.incumbent_obj;
      lk.unlock();

      std::vector<double> lo, up;
      materialize_bounds(node, lo, up);
      LpSolution lp = solve_lp_bounds(m_, p_, lo, up);

      std::vector<Node> children;
      bool unresolved = false;
      bool run_heur = false;
      std::vector<double> heur_x;

      if (lp.status == LpStatus::kInfeasible) {
        // pruned by infeasibility
      } else if (lp.status == LpStatus::kUnbounded || lp.status == LpStatus::kIterLimit) {
        unresolved = true;
      } else {
        double bound = lp.objective;
        double eps = has_inc ? p_.rel_gap_tol * std::max(1.0, std::fabs(inc_obj)) : kInf;
        if (!(has_inc && bound <= inc_obj + eps)) {
          int var = pick_branch_var(lp.x, lo, up);
          if (var < 0) {
            // Integral: candidate incumbent with integers snapped.
            std::vector<double> x = lp.x;
            for (int j : int_vars_) x[j] = std::round(x[j]);
            std::lock_guard<std::mutex> g(st_.mu);
            double obj = lp.objective;
            if (!st_.has_incumbent || obj > st_.incumbent_obj + 1e-12) {
              st_.has_incumbent = true;
              st_.incumbent = std::move(x);
              st_.incumbent_obj = obj;
            }
          } else {
            double frac = lp.x[var] - std::floor(lp.x[var]);
            {
              std::lock_guard<std::mutex> g(st_.mu);
              st_.pcost.record(var, true, 0.0, 0.0);  // placeholder, updated by children
            }
            Node up_child;  // var >= ceil  (for binaries: fixed to 1)
            up_child.depth = node.depth + 1;
            up_child.bound = bound;
            up_child.changes = node.changes;
            up_child.changes.push_back({var, std::ceil(lp.x[var]), kInf});
            Node dn_child;
            dn_child.depth = node.depth + 1;
            dn_child.bound = bound;
            dn_child.changes = node.changes;
            dn_child.changes.push_back({var, -kInf, std::floor(lp.x[var])});
            branch_var_of_.emplace_back();  // no-op, keeps struct simple
            children.push_back(std::move(up_child));
            children.push_back(std::move(dn_child));
            last_branch_ = {var, frac, bound};
          }
        }
        if (nodes_so_far == 1 || (p_.heuristic_period > 0 && nodes_so_far % p_.heuristic_period == 0)) {
          run_heur = true;
          heur_x = lp.x;
        }
      }

      if (run_heur) rounding_heuristic(heur_x);

      lk.lock();
      st_.lp_iterations += lp.iterations;
      if (unresolved) st_.unresolved += 1;
      for (Node& c : children) {
        c.id = st_.next_id++;
        push_node(std::move(c));
      }
      st_.in_flight -= 1;
      st_.cv.notify_all();
    }
  }

  MilpModel m_;
  SolverParams p_;
  std::vector<int> int_vars_;
  SearchState st_;
  bool hit_limits_ = false;
  struct LastBranch {
    int var;
    double frac;
    double bound;
  };
  LastBranch last_branch_{-1, 0, 0};
  std::vector<char> branch_var_of_;
};

}  // namespace

MilpSolution solve_milp(const MilpModel& m, const SolverParams& p,
                        const std::vector<double>* initial_incumbent) {
  BranchAndBound bnb(m, p);
  return bnb.run(initial_incumbent);
}

// ---------------------------------------------------------------------------
// Brute force oracle
// ---------------------------------------------------------------------------

namespace {

struct BruteState {
  const MilpModel& m;
  const SolverParams& p;
  std::vector<int> ints;
  std::vector<double> lo, up;
  // Per-row interval of achievable activity given current fixings.
  std::vector<double> act_min, act_max;
  double best_obj = -kInf;
  std::vector<double> best_x;
  bool any_feasible = false;
  long leaves = 0;

  explicit BruteState(const MilpModel& model, const SolverParams& params)
      : m(model), p(params), lo(model.lower), up(model.upper) {}

  bool rows_possible() const {
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      const Row& row = m.rows[r];
      double tol = 1e-9 * std::max(1.0, std::fabs(row.rhs));
      if (row.rel == Rel::kLe && act_min[r] > row.rhs + tol) return false;
      if (row.rel == Rel::kGe && act_max[r] < row.rhs - tol) return false;
      if (row.rel == Rel::kEq &&
          (act_min[r] > row.rhs + tol || act_max[r] < row.rhs - tol))
        return false;
    }
    return true;
  }

  void apply_bounds_to_intervals() {
    act_min.assign(m.rows.size(), 0.0);
    act_max.assign(m.rows.size(), 0.0);
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      for (const RowTerm& t : m.rows[r].terms) {
        double a = t.coef * lo[t.var], b = t.coef * up[t.var];
        act_min[r] += std::min(a, b);
        act_max[r] += std::max(a, b);
      }
    }
  }

  void shift_interval(int var, double old_lo, double old_up, double new_lo, double new_up) {
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      for (const RowTerm& t : m.rows[r].terms) {
        if (t.var != var) continue;
        double a0 = t.coef * old_lo, b0 = t.coef * old_up;
        double a1 = t.coef * new_lo, b1 = t.coef * new_up;
        act_min[r] += std::min(a1, b1) - std::min(a0, b0);
        act_max[r] += std::max(a1, b1) - std::max(a0, b0);
      }
    }
  }

  void leaf() {
    ++leaves;
    LpSolution lp = solve_lp_bounds(m, p, lo, up);
    if (lp.status != LpStatus::kOptimal) return;
    if (!any_feasible || lp.objective > best_obj + 1e-15) {
      any_feasible = true;
      best_obj = lp.objective;
      best_x = lp.x;
    }
  }

  void recurse(std::size_t k) {
    if (!rows_possible()) return;
    if (k == ints.size()) {
      leaf();
      return;
    }
    int var = ints[k];
    double vlo = lo[var], vup = up[var];
    for (double v = vlo; v <= vup + 0.5; v += 1.0) {
      shift_interval(var, vlo, vup, v, v);
      lo[var] = up[var] = v;
      recurse(k + 1);
      shift_interval(var, v, v, vlo, vup);
      lo[var] = vlo;
      up[var] = vup;
    }
  }
};

}  // namespace

MilpSolution brute_force(const MilpModel& m, const SolverParams& p) {
  m.check_structure();
  BruteState st(m, p);
  for (int j = 0; j < m.num_vars; ++j)
    if (m.is_integer[j] && m.lower[j] < m.upper[j]) st.ints.push_back(j);
  if (static_cast<int>(st.ints.size()) > 22)
    throw std::runtime_error("brute_force guard: more than 22 integer variables");

  auto t0 = std::chrono::steady_clock::now();
  st.apply_bounds_to_intervals();
  st.recurse(0);

  MilpSolution out;
  out.nodes = st.leaves;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (st.any_feasible) {
    out.status = MilpStatus::kOptimal;
    out.x = st.best_x;
    for (int j : st.ints) out.x[j] = std::round(out.x[j]);
    out.objective = st.best_obj;
    out.best_bound = st.best_obj;
    out.rel_gap = 0.0;
  } else {
    out.status = MilpStatus::kInfeasible;
    out.best_bound = -kInf;
  }
  return out;
}

}  // namespace metlearn
