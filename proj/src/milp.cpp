#include "metlearn/milp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace metlearn {

int MilpModel::add_var(const std::string& vname, double lb, double ub, bool integer, double obj,
                       int priority) {
  lower.push_back(lb);
  upper.push_back(ub);
  is_integer.push_back(integer ? 1 : 0);
  var_names.push_back(vname);
  branch_priority.push_back(priority);
  objective.push_back(obj);
  return num_vars++;
}

void MilpModel::add_row(const std::string& rname, std::vector<RowTerm> terms, Rel rel, double rhs) {
  std::sort(terms.begin(), terms.end(), [](const RowTerm& a, const RowTerm& b) { return a.var < b.var; });
  // merge duplicate variables
  std::vector<RowTerm> merged;
  for (const RowTerm& t : terms) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  Row r;
  r.name = rname;
  r.terms = std::move(merged);
  r.rel = rel;
  r.rhs = rhs;
  rows.push_back(std::move(r));
}

int MilpModel::num_binaries() const {
  int k = 0;
  for (int j = 0; j < num_vars; ++j)
    if (is_integer[j]) ++k;
  return k;
}

void MilpModel::check_structure() const {
  std::unordered_set<std::string> names;
  for (int j = 0; j < num_vars; ++j) {
    if (var_names[j].empty()) throw std::runtime_error("variable without a name");
    if (!names.insert(var_names[j]).second)
      throw std::runtime_error("duplicate variable name: " + var_names[j]);
    if (lower[j] > upper[j])
      throw std::runtime_error("variable " + var_names[j] + " has lb > ub");
    if (is_integer[j] && (!std::isfinite(lower[j]) || !std::isfinite(upper[j])))
      throw std::runtime_error("integer variable " + var_names[j] + " must have finite bounds");
  }
  names.clear();
  for (const Row& r : rows) {
    if (r.terms.empty()) throw std::runtime_error("empty constraint row: " + r.name);
    if (r.name.empty()) throw std::runtime_error("row without a name");
    if (!names.insert(r.name).second) throw std::runtime_error("duplicate row name: " + r.name);
    for (const RowTerm& t : r.terms)
      if (t.var < 0 || t.var >= num_vars)
        throw std::runtime_error("row " + r.name + " references unknown variable");
  }
}

double row_activity(const Row& row, const std::vector<double>& x) {
  double v = 0.0;
  for (const RowTerm& t : row.terms) v += t.coef * x[t.var];
  return v;
}

std::string to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kFeasible: return "feasible";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kLimit: return "limit";
  }
  return "?";
}

void SolverParams::check() const {
  if (feas_tol <= 0 || int_tol <= 0 || rel_gap_tol <= 0)
    throw std::runtime_error("solver tolerances must be positive");
  if (threads < 1) throw std::runtime_error("thread count must be >= 1");
  if (deterministic && threads != 1)
    throw std::runtime_error("deterministic mode requires a single thread");
}

ValidationReport validate(const MilpModel& m, const std::vector<double>& x, double tol) {
  if (static_cast<int>(x.size()) != m.num_vars)
    throw std::runtime_error("validate: value vector length mismatch");
  ValidationReport rep;
  for (int j = 0; j < m.num_vars; ++j) {
    if (x[j] < m.lower[j] - tol)
      rep.violations.push_back({Violation::kLowerBound, j, m.lower[j] - x[j]});
    if (x[j] > m.upper[j] + tol)
      rep.violations.push_back({Violation::kUpperBound, j, x[j] - m.upper[j]});
    if (m.is_integer[j]) {
      double frac = std::fabs(x[j] - std::round(x[j]));
      if (frac > tol) rep.violations.push_back({Violation::kIntegrality, j, frac});
    }
  }
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const Row& row = m.rows[r];
    double act = row_activity(row, x);
    double scale = std::max(1.0, std::fabs(row.rhs));
    double viol = 0.0;
    switch (row.rel) {
      case Rel::kLe: viol = act - row.rhs; break;
      case Rel::kGe: viol = row.rhs - act; break;
      case Rel::kEq: viol = std::fabs(act - row.rhs); break;
    }
    if (viol > tol * scale)
      rep.violations.push_back({Violation::kRow, static_cast<int>(r), viol});
  }
  return rep;
}

std::string ValidationReport::describe(const MilpModel& m) const {
  std::ostringstream os;
  for (const Violation& v : violations) {
    switch (v.kind) {
      case Violation::kRow:
        os << "row " << m.rows[v.index].name << " violated by " << v.amount << "\n";
        break;
      case Violation::kLowerBound:
        os << "variable " << m.var_names[v.index] << " below lower bound by " << v.amount << "\n";
        break;
      case Violation::kUpperBound:
        os << "variable " << m.var_names[v.index] << " above upper bound by " << v.amount << "\n";
        break;
      case Violation::kIntegrality:
        os << "variable " << m.var_names[v.index] << " fractional by " << v.amount << "\n";
        break;
    }
  }
  return os.str();
}

}  // namespace metlearn
