#include "gsp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "gsp/program.hpp"
#include "gsp/solver.hpp"

namespace gsp::uncertainty {

namespace {

// Small LP helper: optimize `objective` over {u | G u <= g0}. Used for the
// construction-time feasibility and bounding-box probes.
solver::Solution probe_lp(const Matrix& G, const Vector& g0, const Vector& objective) {
  program::ConvexProgram prog;
  prog.n = static_cast<int>(G.cols());
  prog.objective = objective;
  prog.A = G;
  prog.rhs = g0;
  prog.prov_linear.resize(G.rows(), {-1, 0});
  for (int r = 0; r < G.rows(); ++r) prog.prov_linear[static_cast<std::size_t>(r)].template_row = r;
  solver::SolverConfig cfg;
  return solver::solve_lp(prog, cfg);
}

}  // namespace

bool Box::contains(const Vector& u, double tol) const {
  if (u.size() != lower.size()) return false;
  return (u.array() >= lower.array() - tol).all() && (u.array() <= upper.array() + tol).all();
}

void Box::validate() const {
  if (lower.size() != upper.size()) throw DimensionError("Box: bound dimensions differ");
  if (lower.size() == 0) throw DimensionError("Box: empty dimension");
  if (((upper - lower).array() < 0).any())
    throw ValidationError("Box: lower bound exceeds upper bound");
}

bool Polytope::contains(const Vector& u, double tol) const {
  if (u.size() != G.cols()) return false;
  return ((G * u - g0).array() <= tol).all();
}

UncertaintySet UncertaintySet::box(Vector lower, Vector upper) {
  Box b{std::move(lower), std::move(upper)};
  b.validate();
  UncertaintySet s;
  s.rep_ = std::move(b);
  return s;
}

UncertaintySet UncertaintySet::polytope(Matrix G, Vector g0, Box bounding_box) {
  bounding_box.validate();
  if (G.rows() != g0.size()) throw DimensionError("Polytope: G/g0 row mismatch");
  if (G.cols() != bounding_box.dim()) throw DimensionError("Polytope: box dimension mismatch");
  if (G.rows() == 0) throw ValidationError("Polytope: no inequalities; use a box instead");

  const int dim = static_cast<int>(G.cols());
  // feasibility + box containment in one sweep of coordinate LPs
  for (int i = 0; i < dim; ++i) {
    for (int sign : {+1, -1}) {
      Vector obj = Vector::Zero(dim);
      obj(i) = -sign;  // maximize sign * u_i
      solver::Solution sol = probe_lp(G, g0, obj);
      if (sol.status == solver::Status::Infeasible)
        throw EmptySetError("Polytope: the inequality system is infeasible");
      if (sol.status == solver::Status::Unbounded)
        throw UnboundedSetError("Polytope: unbounded in coordinate " + std::to_string(i));
      double extreme = sol.x(i);
      if (sign > 0 && extreme > bounding_box.upper(i) + 1e-7)
        throw ValidationError("Polytope: bounding box does not contain the set (coordinate " +
                              std::to_string(i) + " reaches " + std::to_string(extreme) + ")");
      if (sign < 0 && extreme < bounding_box.lower(i) - 1e-7)
        throw ValidationError("Polytope: bounding box does not contain the set (coordinate " +
                              std::to_string(i) + " reaches " + std::to_string(extreme) + ")");
    }
  }
  UncertaintySet s;
  s.rep_ = Polytope{std::move(G), std::move(g0), std::move(bounding_box)};
  return s;
}

UncertaintySet UncertaintySet::polytope_autobox(Matrix G, Vector g0) {
  if (G.rows() != g0.size()) throw DimensionError("Polytope: G/g0 row mismatch");
  if (G.rows() == 0 || G.cols() == 0)
    throw UnboundedSetError("Polytope: no inequalities left; the set is all of R^J");

  const int dim = static_cast<int>(G.cols());
  Box box;
  box.lower.resize(dim);
  box.upper.resize(dim);
  for (int i = 0; i < dim; ++i) {
    for (int sign : {+1, -1}) {
      Vector obj = Vector::Zero(dim);
      obj(i) = -sign;
      solver::Solution sol = probe_lp(G, g0, obj);
      if (sol.status == solver::Status::Infeasible)
        throw EmptySetError("Polytope: the inequality system is infeasible");
      if (sol.status == solver::Status::Unbounded)
        throw UnboundedSetError("Polytope: unbounded in coordinate " + std::to_string(i));
      if (sign > 0)
        box.upper(i) = sol.x(i);
      else
        box.lower(i) = sol.x(i);
    }
  }
  UncertaintySet s;
  s.rep_ = Polytope{std::move(G), std::move(g0), std::move(box)};
  return s;
}

int UncertaintySet::dim() const {
  return is_box() ? as_box().dim() : as_polytope().dim();
}

bool UncertaintySet::contains(const Vector& u, double tol) const {
  return is_box() ? as_box().contains(u, tol) : as_polytope().contains(u, tol);
}

const Box& UncertaintySet::bounding_box() const {
  return is_box() ? as_box() : as_polytope().bounding_box;
}

void EndogenousSet::validate() const {
  if (Gv.rows() != Gx.rows() || Gv.rows() != g0.size())
    throw DimensionError("EndogenousSet: row blocks disagree");
  if (Gv.rows() < 1) throw DimensionError("EndogenousSet: at least one inequality required");
}

ScenarioSet ScenarioSet::subset(const std::vector<int>& indices) const {
  ScenarioSet out;
  out.points.resize(static_cast<int>(indices.size()), points.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    int idx = indices[i];
    if (idx < 0 || idx >= count()) throw DomainError("ScenarioSet::subset: index out of range");
    out.points.row(static_cast<int>(i)) = points.row(idx);
  }
  out.source = source;
  out.seed = seed;
  out.names = names;
  return out;
}

ScenarioSet sample_uniform(const UncertaintySet& set, int count, std::uint64_t seed) {
  if (count < 1) throw DomainError("sample_uniform: count must be >= 1");
  const int dim = set.dim();
  const Box& box = set.bounding_box();

  std::mt19937_64 rng(seed);
  ScenarioSet out;
  out.points.resize(count, dim);
  out.source = ScenarioSource::RandomUniform;
  out.seed = seed;

  if (set.is_box()) {
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < dim; ++j)
        out.points(i, j) = box.lower(j) + uniform01(rng) * (box.upper(j) - box.lower(j));
    return out;
  }

  const Polytope& poly = set.as_polytope();
  constexpr long kProbe = 10'000;
  long attempts = 0;
  long accepted = 0;
  Vector cand(dim);
  while (accepted < count) {
    ++attempts;
    for (int j = 0; j < dim; ++j)
      cand(j) = box.lower(j) + uniform01(rng) * (box.upper(j) - box.lower(j));
    if (poly.contains(cand, 0.0)) {
      out.points.row(static_cast<int>(accepted)) = cand.transpose();
      ++accepted;
    }
    if (attempts == kProbe && static_cast<double>(accepted) / static_cast<double>(attempts) < 1e-4)
      throw RejectionEfficiencyError(
          "sample_uniform: acceptance rate below 1e-4 over the probe batch; the polytope is "
          "degenerate relative to its bounding box");
  }
  return out;
}

ScenarioSet grid_samples(const std::vector<std::pair<double, double>>& marginals, int b,
                         std::int64_t cap) {
  if (b < 1) throw DomainError("grid_samples: b must be >= 1");
  if (cap < 1) throw DomainError("grid_samples: cap must be >= 1");
  const int m = static_cast<int>(marginals.size());

  sizing::BigCount total = sizing::pd_grid_count(static_cast<std::uint64_t>(b), m);
  if (!total.exact() || total.value() > static_cast<std::uint64_t>(cap))
    throw GridCapExceeded("grid_samples: " + total.to_string() + " grid points exceed cap " +
                              std::to_string(cap),
                          total);

  const long count = static_cast<long>(total.value());
  ScenarioSet out;
  out.source = ScenarioSource::PDGrid;
  out.points.resize(count, m);

  std::vector<int> odo(static_cast<std::size_t>(m), 0);
  auto level = [&](int var, int idx) {
    auto [lo, hi] = marginals[static_cast<std::size_t>(var)];
    if (b == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(b - 1);
  };
  for (long i = 0; i < count; ++i) {
    for (int v = 0; v < m; ++v) out.points(i, v) = level(v, odo[static_cast<std::size_t>(v)]);
    for (int v = m - 1; v >= 0; --v) {
      if (++odo[static_cast<std::size_t>(v)] < b) break;
      odo[static_cast<std::size_t>(v)] = 0;
    }
  }
  return out;
}

UncertaintySet reformulate_enu(const EndogenousSet& env, const AffineMap& h,
                               double condition_cap) {
  env.validate();
  const int J = env.enu_dim();
  const int n = env.decision_dim();
  if (h.out_dim() != J || h.in_dim() != n)
    throw DimensionError("reformulate_enu: mapping dimensions do not match the set");
  if (J != n)
    throw SingularMapError("reformulate_enu: h must be invertible, which requires J = n (got J=" +
                           std::to_string(J) + ", n=" + std::to_string(n) + ")");

  Eigen::JacobiSVD<Matrix> svd(h.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0 || smax / smin > condition_cap)
    throw SingularMapError("reformulate_enu: mapping matrix is singular or ill-conditioned");

  Matrix Ainv = svd.solve(Matrix::Identity(n, n));
  Matrix GxAinv = env.Gx * Ainv;
  Matrix G = env.Gv + GxAinv;
  Vector g0 = env.g0 + GxAinv * h.b;

  // prune rows whose coefficients vanished under the substitution
  std::vector<int> keep;
  for (int r = 0; r < G.rows(); ++r) {
    double norm = G.row(r).lpNorm<Eigen::Infinity>();
    double scale = std::max({1.0, env.Gv.row(r).lpNorm<Eigen::Infinity>(),
                             env.Gx.row(r).lpNorm<Eigen::Infinity>()});
    if (norm <= 1e-12 * scale) {
      if (g0(r) < -1e-9)
        throw EmptySetError("reformulate_enu: row " + std::to_string(r) +
                            " reduces to 0 <= " + std::to_string(g0(r)));
      continue;  // 0 <= nonnegative: vacuous
    }
    keep.push_back(r);
  }
  Matrix Gk(static_cast<int>(keep.size()), J);
  Vector gk(static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    Gk.row(static_cast<int>(i)) = G.row(keep[i]);
    gk(static_cast<int>(i)) = g0(keep[i]);
  }
  if (keep.empty())
    throw UnboundedSetError(
        "reformulate_enu: every inequality became vacuous; the reformulated set is all of R^J");

  try {
    return UncertaintySet::polytope_autobox(std::move(Gk), std::move(gk));
  } catch (const EmptySetError&) {
    throw EmptySetError("reformulate_enu: the reformulated set V' is empty");
  }
}

AffineFit fit_affine_map(const std::vector<std::pair<Vector, Vector>>& pairs) {
  if (pairs.empty()) throw DimensionError("fit_affine_map: no samples");
  const int n = static_cast<int>(pairs.front().first.size());
  const int J = static_cast<int>(pairs.front().second.size());
  const int N = static_cast<int>(pairs.size());
  if (N < n + 1)
    throw DimensionError("fit_affine_map: need at least n+1 samples, got " + std::to_string(N));

  Matrix X(N, n + 1);
  Matrix V(N, J);
  for (int i = 0; i < N; ++i) {
    const auto& [x, v] = pairs[static_cast<std::size_t>(i)];
    if (x.size() != n || v.size() != J)
      throw DimensionError("fit_affine_map: inconsistent sample dimensions");
    X.row(i).head(n) = x.transpose();
    X(i, n) = 1.0;
    V.row(i) = v.transpose();
  }

  AffineFit fit;
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-10);
  Matrix W;
  if (qr.rank() < n + 1) {
    // ridge fallback for affinely dependent designs
    fit.ridge_fallback = true;
    Matrix gram = X.transpose() * X + 1e-8 * Matrix::Identity(n + 1, n + 1);
    W = gram.ldlt().solve(X.transpose() * V);
  } else {
    W = qr.solve(V);
  }
  fit.map.A = W.topRows(n).transpose();
  fit.map.b = W.row(n).transpose();
  fit.rms = std::sqrt((X * W - V).squaredNorm() / static_cast<double>(N * J));
  return fit;
}

void write_csv(const ScenarioSet& set, std::ostream& out) {
  out << "# source=";
  switch (set.source) {
    case ScenarioSource::RandomUniform: out << "RandomUniform"; break;
    case ScenarioSource::PDGrid: out << "PDGrid"; break;
    case ScenarioSource::External: out << "External"; break;
  }
  if (set.seed) out << " seed=" << *set.seed;
  out << "\n";
  for (int j = 0; j < set.dim(); ++j) {
    if (j) out << ',';
    if (j < static_cast<int>(set.names.size()))
      out << set.names[static_cast<std::size_t>(j)];
    else
      out << 'u' << j;
  }
  out << "\n";
  char buf[32];
  for (int i = 0; i < set.count(); ++i) {
    for (int j = 0; j < set.dim(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", set.points(i, j));
      out << buf;
    }
    out << "\n";
  }
}

ScenarioSet read_csv(std::istream& in) {
  ScenarioSet out;
  std::string line;
  long lineno = 0;
  std::vector<std::vector<double>> rows;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string token;
      while (ss >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        std::string key = token.substr(0, eq);
        std::string val = token.substr(eq + 1);
        if (key == "source") {
          if (val == "RandomUniform")
            out.source = ScenarioSource::RandomUniform;
          else if (val == "PDGrid")
            out.source = ScenarioSource::PDGrid;
          else
            out.source = ScenarioSource::External;
        } else if (key == "seed") {
          out.seed = std::stoull(val);
        }
      }
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      out.names = cells;
      have_header = true;
      continue;
    }
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        vals.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw ParseError("bad numeric cell '" + c + "'", lineno);
      }
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw ParseError("ragged scenario row", lineno);
    rows.push_back(std::move(vals));
  }
  if (!have_header) throw ParseError("missing header row", lineno);
  const int dim = static_cast<int>(out.names.size());
  out.points.resize(static_cast<int>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != dim) throw ParseError("ragged scenario row", lineno);
    for (int j = 0; j < dim; ++j) out.points(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace gsp::uncertainty
