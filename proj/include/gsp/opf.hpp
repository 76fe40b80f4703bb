#ifndef GSP_OPF_HPP
#define GSP_OPF_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsp/common.hpp"
#include "gsp/posterior.hpp"
#include "gsp/program.hpp"
#include "gsp/solver.hpp"
#include "gsp/uncertainty.hpp"

namespace gsp::opf {

enum class BusType { Slack, PV, PQ };

struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double load_p = 0.0;  // MW
  double load_q = 0.0;  // MVAr
  double vmax = 1.1;    // p.u.
  double vmin = 0.9;    // p.u.
};

struct Line {
  int from = 0;              // bus ids
  int to = 0;
  double susceptance = 0.0;  // 1/x, p.u.
  double flow_limit = 0.0;   // MW
};

struct Generator {
  int bus = 0;
  double cost_a = 0.0;   // $/MWh
  double cost_a2 = 0.0;  // $/MW^2 h
  double pmin = 0.0;     // MW
  double pmax = 0.0;     // MW
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  double base_mva = 100.0;
  std::vector<std::string> warnings;  // ignored sections, etc.

  int bus_index(int id) const;  // -1 when unknown
  int slack_index() const;
  double total_load() const;
  // PQ buses with nonzero active load, in bus order: these carry the
  // uncertain deviations.
  std::vector<int> load_bus_indices() const;
  void validate() const;
};

PowerNetwork parse_case(const std::string& text);
PowerNetwork parse_case_file(const std::string& path);

/** Real-time load deviation, one entry per uncertain load bus. */
struct LoadScenario {
  Vector xi;  // MW
  double total() const { return xi.sum(); }
};

struct OpfConfig {
  double delta = 0.1;     // load deviation half-width, relative to the forecast
  double feas_tol = 1e-8;
  solver::SolverConfig solver;
};

/** Dispatch decision: base points, participation factors, and the cost bound. */
struct AdaptiveOpfDecision {
  Vector p_base;  // MW per generator
  Vector beta;    // dimensionless, sums to 1
  double t = 0.0;  // $/h epigraph value
};

/**
 * Assembled adaptive OPF instance. Bus angles are eliminated exactly through
 * the DC flow solve (PTDF), so the decision vector is (p_base, beta, t); the
 * per-scenario angles are recovered on demand for flow evaluation.
 */
struct AdaptiveOpf {
  program::ConvexProgram prog;
  PowerNetwork net;
  std::vector<LoadScenario> scenarios;
  Matrix ptdf;  // lines x buses, MW flow per MW injection, slack column zero
  int ng = 0;

  int idx_p(int g) const { return g; }
  int idx_beta(int g) const { return ng + g; }
  int idx_t() const { return 2 * ng; }
  int n() const { return 2 * ng + 1; }

  AdaptiveOpfDecision decision(const solver::Solution& sol) const;
};

/** Power-transfer distribution factors of the lossless DC model. */
Matrix ptdf_matrix(const PowerNetwork& net);

/**
 * Builds the scenario program of the adaptive OPF: per scenario, real-time
 * generator limits and line-flow limits at the dispatched point
 * p = p_base + beta * sum(xi), plus one quadratic cost-epigraph row; fixed
 * rows carry sum(beta)=1, the base-case energy balance, and box limits.
 * When a mapping is supplied the scenarios are understood to be sampled from
 * the reformulated decision-free set; the mapping is validated and echoed.
 */
AdaptiveOpf build_adaptive_opf(const PowerNetwork& net, const std::vector<LoadScenario>& scenarios,
                               const std::optional<uncertainty::AffineMap>& mapping = std::nullopt,
                               const OpfConfig& cfg = {});

/** Real-time dispatch p_base + beta * sum(xi). */
Vector evaluate_dispatch(const AdaptiveOpfDecision& dec, const LoadScenario& xi);

/** Slack free term of the loss balance; identically zero in the DC model. */
double slack_adjustment(double losses_realtime, double losses_base);

/** Out-of-sample check of generator and line limits at the dispatched points. */
posterior::ViolationReport opf_posterior(const PowerNetwork& net, const AdaptiveOpfDecision& dec,
                                         const std::vector<LoadScenario>& fresh,
                                         double feas_tol = 1e-8);

/** Exogenous scenarios: xi_k ~ U[-delta*load_k, +delta*load_k], i.i.d. */
std::vector<LoadScenario> exu_load_scenarios(const PowerNetwork& net, int count, double delta,
                                             std::uint64_t seed);

/** Uniform grid scenarios over the same deviation box (b levels per load). */
std::vector<LoadScenario> grid_load_scenarios(const PowerNetwork& net, int b, double delta,
                                              std::int64_t cap = 1'000'000);

/**
 * Endogenous scenario pipeline. The demo mechanism links each load's deviation
 * to a price-setting generator: xi = Gamma * (p_ref - p_base) plus noise. An
 * affine map is fitted from synthetic history, the decision-dependent set
 *     {xi | |xi_k - h_k(p_base)/2| <= delta*load_k}
 * is reformulated through the fitted map into a decision-free set, and
 * scenarios are drawn from it. Requires as many generators as uncertain loads.
 */
struct EnuScenarios {
  std::vector<LoadScenario> scenarios;
  uncertainty::AffineMap mapping;  // the fitted h
  double fit_rms = 0.0;
  uncertainty::UncertaintySet reformulated;
};
EnuScenarios enu_load_scenarios(const PowerNetwork& net, int count, double delta,
                                double price_sensitivity, std::uint64_t seed);

}  // namespace gsp::opf

#endif  // GSP_OPF_HPP
