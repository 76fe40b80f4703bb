#ifndef GSP_SOLVER_HPP
#define GSP_SOLVER_HPP

#include <iosfwd>
#include <vector>

#include "gsp/common.hpp"
#include "gsp/program.hpp"

namespace gsp::solver {

enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

const char* status_name(Status s);

struct SolverConfig {
  double feas_tol = 1e-8;    // row satisfaction tolerance
  double cut_tol = 1e-6;     // quadratic rows enforced to this violation
  double active_tol = 1e-7;  // |residual| below this marks a row active
  int max_cuts = 200;        // cutting-plane iterations
  long max_pivots = 1'000'000;
  double var_bound = 1e8;    // internal box on free variables; hitting it means unbounded
  std::ostream* log = nullptr;  // iteration log (one line per pivot/cut) when set

  void validate() const;
};

struct Solution {
  Status status = Status::Infeasible;
  Vector x;
  double objective = 0.0;
  // indices into the program's rows: 0..linear_rows-1, then quad rows
  std::vector<int> active_rows;
  long iterations = 0;
  double max_violation = 0.0;  // over the program's original rows
};

/** Revised-simplex (active-set) solve of a purely linear program. */
Solution solve_lp(const program::ConvexProgram& prog, const SolverConfig& cfg = {});

/**
 * Kelley cutting-plane solve: LP relaxations plus supporting-hyperplane cuts
 * for every quadratic row violated beyond cut_tol. Degenerates to solve_lp
 * when there are no quadratic rows.
 */
Solution solve_convex(const program::ConvexProgram& prog, const SolverConfig& cfg = {});

/** Rows (linear and quadratic) whose residual at x lies within [-tol, +tol]. */
std::vector<int> active_rows(const program::ConvexProgram& prog, const Vector& x, double tol);

}  // namespace gsp::solver

#endif  // GSP_SOLVER_HPP
