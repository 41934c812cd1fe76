#pragma once

// LP and MILP entry points: the LP driver activates violated rows in rounds
// on top of the dense-tableau simplex (large models never materialize slack
// columns for inactive rows), branch and bound explores a shared node pool
// with a rounding heuristic, and brute_force enumerates binary assignments as
// the verification oracle for tiny instances.

#include <optional>
#include <vector>

#include "metlearn/milp.hpp"

namespace metlearn {

LpSolution solve_lp(const MilpModel& m, const SolverParams& p);

// Same, with variable bounds overriding the model's (used by search nodes).
LpSolution solve_lp_bounds(const MilpModel& m, const SolverParams& p,
                           const std::vector<double>& lower, const std::vector<double>& upper);

MilpSolution solve_milp(const MilpModel& m, const SolverParams& p,
                        const std::vector<double>* initial_incumbent = nullptr);

// Exact optimum by enumerating every assignment of the integer variables and
// solving the continuous LP for the feasible ones. Guarded to 22 binaries.
MilpSolution brute_force(const MilpModel& m, const SolverParams& p);

}  // namespace metlearn
