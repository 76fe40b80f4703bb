#ifndef GSP_POSTERIOR_HPP
#define GSP_POSTERIOR_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsp/common.hpp"
#include "gsp/program.hpp"
#include "gsp/sizing.hpp"
#include "gsp/solver.hpp"
#include "gsp/uncertainty.hpp"

namespace gsp::posterior {

/** Out-of-sample violation estimate of a candidate solution. */
struct ViolationReport {
  double alpha_hat = 0.0;
  long trials = 0;
  long violated = 0;
  Vector per_row_rates;  // violation frequency per template row

  std::string to_json() const;
};

/** Scenarios contributing at least one active constraint at the optimum. */
struct SupportReport {
  std::vector<int> support_indices;
  int count = 0;
  int n = 0;  // decision dimension the Proposition bounds against
  bool proposition_holds = false;  // count <= n
  int duplicate_support = 0;  // support scenarios that duplicate another's rows (degenerate ties)

  std::string to_json() const;
};

/**
 * Fraction of fresh scenario pairs under which x_star violates any template
 * row by more than feas_tol. Either scenario set may be empty when the
 * template has no matching block; nonempty sets pair index-by-index.
 */
ViolationReport empirical_violation(const program::ConstraintTemplate& tmpl, const Vector& x_star,
                                    const uncertainty::ScenarioSet& fresh_exo,
                                    const uncertainty::ScenarioSet& fresh_enu,
                                    double feas_tol = 1e-8);

/** Default fresh-sample count: large enough for ~10 expected violations. */
long default_fresh_count(double alpha);

/**
 * Maps the solution's active rows through row provenance to scenario indices.
 * Fixed rows (scenario -1) never contribute. Duplicate support scenarios with
 * identical rows are reported separately: they arise from degenerate ties and
 * do not refute the count <= n proposition.
 */
SupportReport support_scenarios(const program::ConvexProgram& prog, const solver::Solution& sol);

/**
 * Rebuilds the scenario program keeping only the support scenarios, re-solves,
 * and returns the new solution together with |objective drift|. If no scenario
 * is in the support the first scenario is retained so the rebuilt program stays
 * well formed.
 */
std::pair<solver::Solution, double> prune_and_resolve(const program::ScenarioProgram& sp,
                                                      const SupportReport& report,
                                                      const solver::SolverConfig& cfg = {});

/**
 * Analytic test family for the confidence machinery:
 *     min 1^T x  s.t.  x_i >= u_i  per scenario,  u ~ U[0,1]^dim.
 * The solution is the componentwise maximum and its exact violation
 * probability is 1 - prod_i x_i.
 */
struct AnalyticFamily {
  int dim = 1;

  program::ScenarioProgram instance(const uncertainty::ScenarioSet& scenarios) const;
  uncertainty::ScenarioSet sample(int count, std::uint64_t seed) const;
  double exact_violation(const Vector& x_star) const;
};

/**
 * Runs `trials` independent experiments: draw min_scenarios(spec) scenarios,
 * solve, and evaluate the exact violation probability of the optimizer.
 * Returns the fraction of trials whose violation exceeds spec.alpha, to be
 * compared against 1 - epsilon. Trial t uses seed + t.
 */
double confidence_trial(const sizing::ChanceSpec& spec, const AnalyticFamily& family, int trials,
                        std::uint64_t seed);

}  // namespace gsp::posterior

#endif  // GSP_POSTERIOR_HPP
