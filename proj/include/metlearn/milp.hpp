#pragma once

// Solver-agnostic mixed-integer linear program representation plus the
// solution/parameter types shared by the simplex core, branch and bound, the
// brute-force oracle, and the MPS reader/writer.

#include <limits>
#include <string>
#include <vector>

namespace metlearn {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Rel : char { kLe = 'L', kEq = 'E', kGe = 'G' };

struct RowTerm {
  int var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<RowTerm> terms;  // sorted by var index, no duplicates
  Rel rel = Rel::kLe;
  double rhs = 0.0;
};

struct MilpModel {
  std::string name = "model";
  int num_vars = 0;
  std::vector<double> lower, upper;
  std::vector<char> is_integer;
  std::vector<std::string> var_names;
  std::vector<int> branch_priority;  // higher branches first
  std::vector<Row> rows;
  std::vector<double> objective;  // dense
  bool maximize = true;

  int add_var(const std::string& name, double lb, double ub, bool integer, double obj = 0.0,
              int priority = 0);
  void add_row(const std::string& name, std::vector<RowTerm> terms, Rel rel, double rhs);

  int num_binaries() const;
  // Checks: unique nonempty names, finite bounds on integer variables,
  // nonempty rows, lb <= ub. Throws on violation.
  void check_structure() const;
};

double row_activity(const Row& row, const std::vector<double>& x);

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterLimit;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> row_activity;
  long iterations = 0;
};

enum class MilpStatus { kOptimal, kFeasible, kInfeasible, kLimit };

std::string to_string(MilpStatus s);

struct MilpSolution {
  MilpStatus status = MilpStatus::kLimit;
  std::vector<double> x;  // incumbent (empty if none)
  double objective = -kInf;
  double best_bound = kInf;
  double rel_gap = kInf;
  long nodes = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;
  bool has_incumbent() const { return !x.empty(); }
};

enum class BranchRule { kMostFractional, kPseudoCost };
enum class NodeOrder { kBestBound, kDepthFirst };

struct SolverParams {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  double rel_gap_tol = 1e-6;
  long node_limit = -1;       // < 0: unlimited
  double time_limit = -1.0;   // seconds; < 0: unlimited; ignored when deterministic
  long lp_iteration_limit = 2000000;
  BranchRule branch_rule = BranchRule::kMostFractional;
  NodeOrder node_order = NodeOrder::kBestBound;
  bool deterministic = false;
  int threads = 1;
  // Row counts above the threshold solve the LP by activating violated rows
  // in rounds; the final basis is certified against every row.
  int lazy_row_threshold = 600;
  int lazy_batch = 400;
  int heuristic_period = 40;  // apply the rounding heuristic every N nodes

  void check() const;
};

struct Violation {
  enum Kind { kRow, kLowerBound, kUpperBound, kIntegrality } kind;
  int index;
  double amount;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
  std::string describe(const MilpModel& m) const;
};

ValidationReport validate(const MilpModel& m, const std::vector<double>& x, double tol);

}  // namespace metlearn
