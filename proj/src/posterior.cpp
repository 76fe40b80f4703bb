#include "gsp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace gsp::posterior {

using nlohmann::json;

std::string ViolationReport::to_json() const {
  json j;
  j["alpha_hat"] = alpha_hat;
  j["trials"] = trials;
  j["violated"] = violated;
  j["per_row_rates"] = std::vector<double>(per_row_rates.data(), per_row_rates.data() + per_row_rates.size());
  return j.dump(2);
}

std::string SupportReport::to_json() const {
  json j;
  j["support_indices"] = support_indices;
  j["count"] = count;
  j["n"] = n;
  j["proposition_holds"] = proposition_holds;
  j["duplicate_support"] = duplicate_support;
  return j.dump(2);
}

long default_fresh_count(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("default_fresh_count: alpha out of (0,1)");
  return std::max(static_cast<long>(std::ceil(10.0 / alpha)), 1000L);
}

ViolationReport empirical_violation(const program::ConstraintTemplate& tmpl, const Vector& x_star,
                                    const uncertainty::ScenarioSet& fresh_exo,
                                    const uncertainty::ScenarioSet& fresh_enu, double feas_tol) {
  if (x_star.size() != tmpl.n()) throw DimensionError("empirical_violation: x dimension mismatch");
  const bool has_exo = fresh_exo.count() > 0;
  const bool has_enu = fresh_enu.count() > 0;
  if (!has_exo && !has_enu) throw ValidationError("empirical_violation: no fresh scenarios");
  if (has_exo && has_enu && fresh_exo.count() != fresh_enu.count())
    throw DimensionError("empirical_violation: fresh scenario counts differ");
  if (has_exo && fresh_exo.dim() != tmpl.exo_dim())
    throw DimensionError("empirical_violation: exogenous dimension mismatch");
  if (has_enu && fresh_enu.dim() != tmpl.enu_dim())
    throw DimensionError("empirical_violation: endogenous dimension mismatch");

  const long N = std::max(fresh_exo.count(), fresh_enu.count());
  const int m = tmpl.rows();
  const Vector base = tmpl.Fx * x_star - tmpl.f0;

  ViolationReport rep;
  rep.trials = N;
  rep.per_row_rates = Vector::Zero(m);
  for (long i = 0; i < N; ++i) {
    Vector resid = base;
    if (has_exo && tmpl.exo_dim() > 0)
      resid += tmpl.Fu * fresh_exo.scenario(static_cast<int>(i));
    if (has_enu && tmpl.enu_dim() > 0)
      resid += tmpl.Fv * fresh_enu.scenario(static_cast<int>(i));
    bool violated = false;
    for (int r = 0; r < m; ++r) {
      bool over = resid(r) > feas_tol;
      if (tmpl.row_sense(r) == program::RowSense::EQ) over = std::abs(resid(r)) > feas_tol;
      if (over) {
        rep.per_row_rates(r) += 1.0;
        violated = true;
      }
    }
    if (violated) ++rep.violated;
  }
  rep.per_row_rates /= static_cast<double>(N);
  rep.alpha_hat = static_cast<double>(rep.violated) / static_cast<double>(N);
  return rep;
}

SupportReport support_scenarios(const program::ConvexProgram& prog, const solver::Solution& sol) {
  if (sol.status != solver::Status::Optimal)
    throw ValidationError("support_scenarios: solution is not Optimal");
  prog.check_consistent();

  std::set<int> support;
  for (int row : sol.active_rows) {
    program::RowProvenance p;
    if (row < prog.linear_rows())
      p = prog.prov_linear[static_cast<std::size_t>(row)];
    else
      p = prog.prov_quad[static_cast<std::size_t>(row - prog.linear_rows())];
    if (p.scenario >= 0) support.insert(p.scenario);
  }

  SupportReport rep;
  rep.support_indices.assign(support.begin(), support.end());
  rep.count = static_cast<int>(rep.support_indices.size());
  rep.n = prog.n;
  rep.proposition_holds = rep.count <= rep.n;

  // Degenerate ties: support scenarios whose materialized rows coincide with
  // another support scenario's rows.
  auto rows_of = [&](int scenario) {
    std::vector<std::pair<Vector, double>> rows;
    for (int r = 0; r < prog.linear_rows(); ++r)
      if (prog.prov_linear[static_cast<std::size_t>(r)].scenario == scenario)
        rows.emplace_back(prog.A.row(r).transpose(), prog.rhs(r));
    return rows;
  };
  auto same_rows = [](const std::vector<std::pair<Vector, double>>& a,
                      const std::vector<std::pair<Vector, double>>& b) {
    if (a.size() != b.size() || a.empty()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if ((a[i].first - b[i].first).lpNorm<Eigen::Infinity>() > 1e-12) return false;
      if (std::abs(a[i].second - b[i].second) > 1e-12) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < rep.support_indices.size(); ++i) {
    auto ri = rows_of(rep.support_indices[i]);
    for (std::size_t k = 0; k < i; ++k) {
      if (same_rows(ri, rows_of(rep.support_indices[k]))) {
        ++rep.duplicate_support;
        break;
      }
    }
  }
  return rep;
}

std::pair<solver::Solution, double> prune_and_resolve(const program::ScenarioProgram& sp,
                                                      const SupportReport& report,
                                                      const solver::SolverConfig& cfg) {
  program::ScenarioProgram pruned = sp;
  std::vector<int> keep = report.support_indices;
  if (keep.empty()) keep.push_back(0);  // keep the program well formed
  if (sp.exo_scenarios.count() > 0) pruned.exo_scenarios = sp.exo_scenarios.subset(keep);
  if (sp.enu_scenarios.count() > 0) pruned.enu_scenarios = sp.enu_scenarios.subset(keep);

  program::ConvexProgram full = program::build_deterministic(sp);
  program::ConvexProgram reduced = program::build_deterministic(pruned);
  solver::Solution before = full.quads.empty() ? solver::solve_lp(full, cfg)
                                               : solver::solve_convex(full, cfg);
  solver::Solution after = reduced.quads.empty() ? solver::solve_lp(reduced, cfg)
                                                 : solver::solve_convex(reduced, cfg);
  double drift = std::abs(after.objective - before.objective);
  return {after, drift};
}

program::ScenarioProgram AnalyticFamily::instance(
    const uncertainty::ScenarioSet& scenarios) const {
  if (scenarios.dim() != dim) throw DimensionError("AnalyticFamily: scenario dimension mismatch");
  program::ScenarioProgram sp;
  sp.n = dim;
  sp.objective = Vector::Ones(dim);
  sp.tmpl.Fx = -Matrix::Identity(dim, dim);  // u - x <= 0
  sp.tmpl.Fu = Matrix::Identity(dim, dim);
  sp.tmpl.Fv = Matrix(dim, 0);
  sp.tmpl.f0 = Vector::Zero(dim);
  sp.exo_scenarios = scenarios;
  return sp;
}

uncertainty::ScenarioSet AnalyticFamily::sample(int count, std::uint64_t seed) const {
  auto set = uncertainty::UncertaintySet::box(Vector::Zero(dim), Vector::Ones(dim));
  return uncertainty::sample_uniform(set, count, seed);
}

double AnalyticFamily::exact_violation(const Vector& x_star) const {
  // P(exists i with u_i > x_i) for independent U[0,1] coordinates
  double sat = 1.0;
  for (int i = 0; i < dim; ++i) sat *= std::min(1.0, std::max(0.0, x_star(i)));
  return 1.0 - sat;
}

double confidence_trial(const sizing::ChanceSpec& spec, const AnalyticFamily& family, int trials,
                        std::uint64_t seed) {
  spec.validate();
  if (trials < 1) throw DomainError("confidence_trial: trials must be >= 1");
  if (family.dim != spec.n)
    throw DimensionError("confidence_trial: family dimension must equal spec.n");

  const long need = sizing::min_scenarios(spec);
  long exceed = 0;
  for (int t = 0; t < trials; ++t) {
    auto scen = family.sample(static_cast<int>(need), seed + static_cast<std::uint64_t>(t));
    auto sp = family.instance(scen);
    auto prog = program::build_deterministic(sp);
    auto sol = solver::solve_lp(prog);
    if (sol.status != solver::Status::Optimal)
      throw ValidationError("confidence_trial: trial LP did not solve to optimality");
    if (family.exact_violation(sol.x) > spec.alpha) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(trials);
}

}  // namespace gsp::posterior
