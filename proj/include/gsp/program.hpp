#ifndef GSP_PROGRAM_HPP
#define GSP_PROGRAM_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsp/common.hpp"
#include "gsp/uncertainty.hpp"

namespace gsp::program {

enum class RowSense { LE, EQ };  // EQ rows are expanded into a <= / >= pair at build time

/** Convex quadratic constraint x^T Q x + a^T x + c <= 0 with Q PSD. */
struct QuadRow {
  Matrix Q;
  Vector a;
  double c = 0.0;

  double eval(const Vector& x) const { return x.dot(Q * x) + a.dot(x) + c; }
  Vector gradient(const Vector& x) const { return 2.0 * (Q * x) + a; }
  // least eigenvalue must clear -1e-9 (scaled)
  void check_psd(double floor = -1e-9) const;
};

/**
 * Constraint template of a scenario program. Scenario rows are instantiated
 * once per scenario pair with the semantics
 *     Fx*x + Fu*u + Fv*v - f0 <= 0   (or == 0, expanded to two inequalities),
 * while fixed rows (fixed_Fx*x - fixed_f0 <= 0) and quadratic rows are
 * scenario-independent and emitted exactly once.
 */
struct ConstraintTemplate {
  Matrix Fx;  // m x n
  Matrix Fu;  // m x I (0 columns when there is no exogenous input)
  Matrix Fv;  // m x J
  Vector f0;  // m
  std::vector<RowSense> sense;  // per template row; empty means all LE

  Matrix fixed_Fx;  // q x n scenario-independent rows
  Vector fixed_f0;  // q
  std::vector<RowSense> fixed_sense;

  std::vector<QuadRow> quad;  // scenario-independent convex quadratic rows

  int rows() const { return static_cast<int>(Fx.rows()); }
  int fixed_rows() const { return static_cast<int>(fixed_Fx.rows()); }
  int n() const { return static_cast<int>(Fx.cols()); }
  int exo_dim() const { return static_cast<int>(Fu.cols()); }
  int enu_dim() const { return static_cast<int>(Fv.cols()); }

  RowSense row_sense(int r) const { return sense.empty() ? RowSense::LE : sense.at(r); }
  RowSense fixed_row_sense(int r) const {
    return fixed_sense.empty() ? RowSense::LE : fixed_sense.at(r);
  }
};

enum class BuildMode { Plain, StrictMapping };

/**
 * A scenario program: min objective^T x subject to the template instantiated
 * over the supplied scenarios. Exogenous and endogenous scenario lists are
 * paired index-by-index (zip); when both are present their counts must agree.
 * StrictMapping additionally pins h(x) to every endogenous scenario via the
 * paired inequalities h(x) <= v and -h(x) <= -v.
 */
struct ScenarioProgram {
  int n = 0;
  Vector objective;
  ConstraintTemplate tmpl;
  uncertainty::ScenarioSet exo_scenarios;  // count 0 when unused
  uncertainty::ScenarioSet enu_scenarios;
  std::optional<uncertainty::AffineMap> mapping;
  BuildMode mode = BuildMode::Plain;

  int scenario_count() const;
};

/** (scenario, template row) origin of a materialized constraint row; scenario -1 marks fixed rows. */
struct RowProvenance {
  int scenario = -1;
  int template_row = 0;
};

/**
 * Materialized deterministic convex program: min objective^T x subject to
 * A x <= rhs plus the quadratic rows. Every row carries provenance so active
 * constraints can be traced back to the scenario that produced them.
 */
struct ConvexProgram {
  int n = 0;
  Vector objective;
  Matrix A;    // rows x n
  Vector rhs;  // rows
  std::vector<QuadRow> quads;
  std::vector<RowProvenance> prov_linear;  // one entry per row of A
  std::vector<RowProvenance> prov_quad;    // one entry per quad row
  std::vector<std::string> warnings;

  int linear_rows() const { return static_cast<int>(A.rows()); }
  int quad_rows() const { return static_cast<int>(quads.size()); }
  void check_consistent() const;

  // bit-exact plain-text serialization (OBJECTIVE / ROW / QROW / PROV lines)
  void dump(std::ostream& out) const;
  static ConvexProgram load(std::istream& in);
};

/** Instantiates the template over the scenario pairs and collects provenance. */
ConvexProgram build_deterministic(const ScenarioProgram& sp);

/**
 * Epigraph reformulation: appends decision variable t, moves the quadratic
 * cost into the constraint x^T Q x + a^T x + c - t <= 0 and sets the
 * objective to min t.
 */
ScenarioProgram epigraph_objective(const ScenarioProgram& sp, const QuadRow& cost);

}  // namespace gsp::program

#endif  // GSP_PROGRAM_HPP
