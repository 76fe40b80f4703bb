#include "gsp/program.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace gsp::program {

void QuadRow::check_psd(double floor) const {
  if (Q.rows() != Q.cols()) throw DimensionError("QuadRow: Q must be square");
  if (a.size() != Q.rows()) throw DimensionError("QuadRow: a/Q dimension mismatch");
  if (Q.rows() == 0) return;
  Matrix sym = 0.5 * (Q + Q.transpose());
  if ((sym - Q).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + Q.lpNorm<Eigen::Infinity>()))
    throw ValidationError("QuadRow: Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  double scale = 1.0 + sym.lpNorm<Eigen::Infinity>();
  if (es.eigenvalues().minCoeff() < floor * scale)
    throw ValidationError("QuadRow: Q is not positive semidefinite");
}

int ScenarioProgram::scenario_count() const {
  int ne = exo_scenarios.count();
  int nv = enu_scenarios.count();
  if (ne > 0 && nv > 0 && ne != nv)
    throw DimensionError("ScenarioProgram: exogenous and endogenous scenario counts differ (" +
                         std::to_string(ne) + " vs " + std::to_string(nv) +
                         "); scenarios pair index-by-index");
  return std::max(ne, nv);
}

void ConvexProgram::check_consistent() const {
  if (n < 1) throw DimensionError("ConvexProgram: n must be >= 1");
  if (objective.size() != n) throw DimensionError("ConvexProgram: objective dimension mismatch");
  if (A.rows() != rhs.size() || (A.rows() > 0 && A.cols() != n))
    throw DimensionError("ConvexProgram: constraint matrix dimension mismatch");
  if (prov_linear.size() != static_cast<std::size_t>(A.rows()))
    throw ValidationError("ConvexProgram: linear row provenance incomplete");
  if (prov_quad.size() != quads.size())
    throw ValidationError("ConvexProgram: quad row provenance incomplete");
  for (const auto& q : quads)
    if (q.Q.rows() != n || q.a.size() != n)
      throw DimensionError("ConvexProgram: quad row dimension mismatch");
}

namespace {

void append_row(Matrix& A, Vector& rhs, std::vector<RowProvenance>& prov, const Vector& coeffs,
                double b, RowProvenance p) {
  A.conservativeResize(A.rows() + 1, Eigen::NoChange);
  A.row(A.rows() - 1) = coeffs.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = b;
  prov.push_back(p);
}

}  // namespace

ConvexProgram build_deterministic(const ScenarioProgram& sp) {
  const ConstraintTemplate& t = sp.tmpl;
  if (sp.n < 1) throw DimensionError("build_deterministic: n must be >= 1");
  if (sp.objective.size() != sp.n)
    throw DimensionError("build_deterministic: objective dimension mismatch");
  if (t.n() != sp.n) throw DimensionError("build_deterministic: template n mismatch");
  if (t.rows() != t.Fu.rows() || t.rows() != t.Fv.rows() || t.rows() != t.f0.size())
    throw DimensionError("build_deterministic: template row blocks disagree");
  if (!t.sense.empty() && static_cast<int>(t.sense.size()) != t.rows())
    throw DimensionError("build_deterministic: sense list does not match template rows");
  if (t.fixed_rows() > 0 && t.fixed_Fx.cols() != sp.n)
    throw DimensionError("build_deterministic: fixed row dimension mismatch");

  const int N = sp.scenario_count();
  if (N < 1) throw ValidationError("build_deterministic: empty scenario set");
  const bool has_exo = sp.exo_scenarios.count() > 0;
  const bool has_enu = sp.enu_scenarios.count() > 0;
  if (has_exo && sp.exo_scenarios.dim() != t.exo_dim())
    throw DimensionError("build_deterministic: exogenous scenario dimension mismatch");
  if (has_enu && sp.enu_scenarios.dim() != t.enu_dim())
    throw DimensionError("build_deterministic: endogenous scenario dimension mismatch");
  if (!has_exo && t.exo_dim() > 0)
    throw DimensionError("build_deterministic: template expects exogenous scenarios");
  if (!has_enu && t.enu_dim() > 0)
    throw DimensionError("build_deterministic: template expects endogenous scenarios");
  if (sp.mode == BuildMode::StrictMapping && !sp.mapping)
    throw ValidationError("build_deterministic: StrictMapping requires a mapping");

  ConvexProgram out;
  out.n = sp.n;
  out.objective = sp.objective;
  out.A.resize(0, sp.n);
  out.rhs.resize(0);

  // fixed rows first
  for (int r = 0; r < t.fixed_rows(); ++r) {
    Vector row = t.fixed_Fx.row(r).transpose();
    double b = t.fixed_f0(r);
    append_row(out.A, out.rhs, out.prov_linear, row, b, {-1, r});
    if (t.fixed_row_sense(r) == RowSense::EQ)
      append_row(out.A, out.rhs, out.prov_linear, Vector(-row), -b, {-1, r});
  }

  // scenario blocks: Fx x <= f0 - Fu u - Fv v
  for (int j = 0; j < N; ++j) {
    Vector fu = Vector::Zero(t.rows());
    if (has_exo && t.exo_dim() > 0) fu = t.Fu * sp.exo_scenarios.scenario(j);
    Vector fv = Vector::Zero(t.rows());
    if (has_enu && t.enu_dim() > 0) fv = t.Fv * sp.enu_scenarios.scenario(j);
    for (int r = 0; r < t.rows(); ++r) {
      Vector row = t.Fx.row(r).transpose();
      double b = t.f0(r) - fu(r) - fv(r);
      append_row(out.A, out.rhs, out.prov_linear, row, b, {j, r});
      if (t.row_sense(r) == RowSense::EQ)
        append_row(out.A, out.rhs, out.prov_linear, Vector(-row), -b, {j, r});
    }
  }

  // strict mapping rows: h(x) <= v and -h(x) <= -v per endogenous scenario
  if (sp.mode == BuildMode::StrictMapping) {
    const auto& h = *sp.mapping;
    if (h.in_dim() != sp.n || h.out_dim() != t.enu_dim())
      throw DimensionError("build_deterministic: mapping dimensions mismatch");
    if (!has_enu) throw ValidationError("build_deterministic: StrictMapping without scenarios");

    int distinct = 1;
    for (int j = 1; j < sp.enu_scenarios.count(); ++j)
      if ((sp.enu_scenarios.scenario(j) - sp.enu_scenarios.scenario(0)).lpNorm<Eigen::Infinity>() >
          1e-12)
        distinct = 2;
    if (distinct > 1)
      out.warnings.push_back(
          "StrictMapping pins h(x) to every endogenous scenario; more than one distinct "
          "scenario makes the program infeasible");

    const int J = h.out_dim();
    for (int j = 0; j < sp.enu_scenarios.count(); ++j) {
      Vector v = sp.enu_scenarios.scenario(j);
      for (int k = 0; k < J; ++k) {
        Vector row = h.A.row(k).transpose();
        append_row(out.A, out.rhs, out.prov_linear, row, v(k) - h.b(k), {j, t.rows() + k});
        append_row(out.A, out.rhs, out.prov_linear, Vector(-row), h.b(k) - v(k),
                   {j, t.rows() + J + k});
      }
    }
  }

  for (int q = 0; q < static_cast<int>(t.quad.size()); ++q) {
    const QuadRow& row = t.quad[q];
    if (row.Q.rows() != sp.n || row.a.size() != sp.n)
      throw DimensionError("build_deterministic: quad row dimension mismatch");
    row.check_psd();
    out.quads.push_back(row);
    out.prov_quad.push_back({-1, q});
  }

  out.check_consistent();
  return out;
}

ScenarioProgram epigraph_objective(const ScenarioProgram& sp, const QuadRow& cost) {
  if (cost.Q.rows() != sp.n || cost.a.size() != sp.n)
    throw DimensionError("epigraph_objective: cost dimension mismatch");
  cost.check_psd();

  ScenarioProgram out = sp;
  const int n = sp.n;
  out.n = n + 1;

  out.objective = Vector::Zero(n + 1);
  out.objective(n) = 1.0;

  auto widen = [&](const Matrix& M) {
    Matrix W(M.rows(), n + 1);
    W.setZero();
    if (M.rows() > 0) W.leftCols(n) = M;
    return W;
  };
  out.tmpl.Fx = widen(sp.tmpl.Fx);
  out.tmpl.fixed_Fx = widen(sp.tmpl.fixed_Fx);

  out.tmpl.quad.clear();
  for (const auto& q : sp.tmpl.quad) {
    QuadRow w;
    w.Q = Matrix::Zero(n + 1, n + 1);
    w.Q.topLeftCorner(n, n) = q.Q;
    w.a = Vector::Zero(n + 1);
    w.a.head(n) = q.a;
    w.c = q.c;
    out.tmpl.quad.push_back(std::move(w));
  }

  QuadRow epi;
  epi.Q = Matrix::Zero(n + 1, n + 1);
  epi.Q.topLeftCorner(n, n) = cost.Q;
  epi.a = Vector::Zero(n + 1);
  epi.a.head(n) = cost.a;
  epi.a(n) = -1.0;  // ... - t <= 0
  epi.c = cost.c;
  out.tmpl.quad.push_back(std::move(epi));

  if (out.mapping) {
    // h keeps acting on the original decision block
    Matrix A(out.mapping->A.rows(), n + 1);
    A.setZero();
    A.leftCols(n) = out.mapping->A;
    out.mapping->A = std::move(A);
  }
  return out;
}

// ---------------------------------------------------------------------------
// plain-text serialization
// ---------------------------------------------------------------------------

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void put_vector(std::ostream& out, const Vector& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    put(out, v(i));
  }
}

}  // namespace

void ConvexProgram::dump(std::ostream& out) const {
  check_consistent();
  out << "GSP-PROGRAM 1\n";
  out << "VARS " << n << "\n";
  out << "OBJECTIVE ";
  put_vector(out, objective);
  out << "\n";
  for (int r = 0; r < linear_rows(); ++r) {
    out << "ROW ";
    put_vector(out, A.row(r).transpose());
    out << " <= ";
    put(out, rhs(r));
    out << "\n";
  }
  for (const auto& q : quads) {
    out << "QROW";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        out << ' ';
        put(out, q.Q(i, j));
      }
    out << " ;";
    for (int i = 0; i < n; ++i) {
      out << ' ';
      put(out, q.a(i));
    }
    out << " ; ";
    put(out, q.c);
    out << "\n";
  }
  for (const auto& p : prov_linear) out << "PROV " << p.scenario << ' ' << p.template_row << "\n";
  for (const auto& p : prov_quad) out << "PROV " << p.scenario << ' ' << p.template_row << "\n";
}

ConvexProgram ConvexProgram::load(std::istream& in) {
  ConvexProgram prog;
  std::string line;
  long lineno = 0;
  std::vector<RowProvenance> prov;

  auto fail = [&](const std::string& msg) -> ParseError { return ParseError(msg, lineno); };

  if (!std::getline(in, line)) throw ParseError("empty program file", 1);
  ++lineno;
  if (line != "GSP-PROGRAM 1") throw fail("expected header 'GSP-PROGRAM 1'");

  bool have_vars = false;
  std::vector<Vector> rows;
  std::vector<double> rhs_list;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "VARS") {
      if (!(ss >> prog.n) || prog.n < 1) throw fail("bad VARS line");
      have_vars = true;
    } else if (tag == "OBJECTIVE") {
      if (!have_vars) throw fail("OBJECTIVE before VARS");
      prog.objective.resize(prog.n);
      for (int i = 0; i < prog.n; ++i)
        if (!(ss >> prog.objective(i))) throw fail("objective too short");
    } else if (tag == "ROW") {
      if (!have_vars) throw fail("ROW before VARS");
      Vector row(prog.n);
      for (int i = 0; i < prog.n; ++i)
        if (!(ss >> row(i))) throw fail("row too short");
      std::string rel;
      double b;
      if (!(ss >> rel >> b) || rel != "<=") throw fail("row must end in '<= rhs'");
      rows.push_back(std::move(row));
      rhs_list.push_back(b);
    } else if (tag == "QROW") {
      if (!have_vars) throw fail("QROW before VARS");
      QuadRow q;
      q.Q.resize(prog.n, prog.n);
      for (int i = 0; i < prog.n; ++i)
        for (int j = 0; j < prog.n; ++j)
          if (!(ss >> q.Q(i, j))) throw fail("QROW matrix too short");
      std::string sep;
      if (!(ss >> sep) || sep != ";") throw fail("QROW missing ';' after matrix");
      q.a.resize(prog.n);
      for (int i = 0; i < prog.n; ++i)
        if (!(ss >> q.a(i))) throw fail("QROW linear part too short");
      if (!(ss >> sep) || sep != ";") throw fail("QROW missing ';' after linear part");
      if (!(ss >> q.c)) throw fail("QROW missing constant");
      prog.quads.push_back(std::move(q));
    } else if (tag == "PROV") {
      RowProvenance p;
      if (!(ss >> p.scenario >> p.template_row)) throw fail("bad PROV line");
      prov.push_back(p);
    } else {
      throw fail("unknown tag '" + tag + "'");
    }
  }
  if (!have_vars) throw ParseError("missing VARS line", lineno);
  prog.A.resize(static_cast<int>(rows.size()), prog.n);
  prog.rhs.resize(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    prog.A.row(static_cast<int>(r)) = rows[r].transpose();
    prog.rhs(static_cast<int>(r)) = rhs_list[r];
  }
  if (prov.size() != rows.size() + prog.quads.size())
    throw ParseError("provenance does not cover every row exactly once", lineno);
  prog.prov_linear.assign(prov.begin(), prov.begin() + static_cast<long>(rows.size()));
  prog.prov_quad.assign(prov.begin() + static_cast<long>(rows.size()), prov.end());
  prog.check_consistent();
  return prog;
}

}  // namespace gsp::program
