#include "gsp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gsp::solver {

const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterLimit: return "IterLimit";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (feas_tol <= 0 || cut_tol <= 0 || active_tol <= 0)
    throw DomainError("SolverConfig: tolerances must be positive");
  if (max_cuts < 1 || max_pivots < 1)
    throw DomainError("SolverConfig: iteration limits must be positive");
  if (var_bound <= 0) throw DomainError("SolverConfig: var_bound must be positive");
}

namespace {

// ---------------------------------------------------------------------------
// Active-set engine for   min c^T x   s.t.   R x <= r,   x free.
//
// The working set W holds exactly dim linearly independent active rows; the
// iterate is the vertex R_W x = r_W. An explicit inverse of the working-set
// matrix is kept and updated by Sherman-Morrison, with periodic full
// refactorization. Pricing is steepest-multiplier with least-index
// tie-breaking; after a run of degenerate steps the engine falls back to
// Bland's least-index rule until a positive step is made, which rules out
// cycling.
// ---------------------------------------------------------------------------

constexpr int kRefactorInterval = 64;
constexpr int kDegenerateSwitch = 50;

enum class EngineStatus { Optimal, NoBlockingRow, IterLimit };

struct Engine {
  const Matrix& R;
  const Vector& rhs;
  Vector c;
  long max_pivots;
  std::ostream* log = nullptr;

  int dim;
  int rows;
  Vector x;
  std::vector<int> W;        // working-set row indices, size dim
  Matrix Binv;               // inverse of the working-set matrix (rows of R stacked)
  Vector slack;              // rhs - R x, maintained incrementally
  long pivots = 0;
  int since_refactor = 0;
  int degenerate_run = 0;
  bool bland_mode = false;

  Engine(const Matrix& R_, const Vector& rhs_, Vector c_, long max_pivots_)
      : R(R_), rhs(rhs_), c(std::move(c_)), max_pivots(max_pivots_),
        dim(static_cast<int>(R_.cols())), rows(static_cast<int>(R_.rows())) {}

  void refactor() {
    Matrix B(dim, dim);
    for (int i = 0; i < dim; ++i) B.row(i) = R.row(W[i]);
    Eigen::PartialPivLU<Matrix> lu(B);
    Binv = lu.inverse();
    x = Binv * gather_rhs();
    slack = rhs - R * x;
    since_refactor = 0;
  }

  Vector gather_rhs() const {
    Vector b(dim);
    for (int i = 0; i < dim; ++i) b(i) = rhs(W[i]);
    return b;
  }

  bool in_working_set(int row) const {
    return std::find(W.begin(), W.end(), row) != W.end();
  }

  // One simplex step. Returns true when optimal.
  EngineStatus run() {
    refactor();
    const double opt_tol = 1e-9 * (1.0 + c.lpNorm<Eigen::Infinity>());
    while (true) {
      if (pivots >= max_pivots) return EngineStatus::IterLimit;

      // multipliers: R_W^T mu = -c
      Vector mu = -(Binv.transpose() * c);
      int leave_pos = -1;
      if (bland_mode) {
        // least row index among negative multipliers
        int best_row = std::numeric_limits<int>::max();
        for (int i = 0; i < dim; ++i)
          if (mu(i) < -opt_tol && W[i] < best_row) {
            best_row = W[i];
            leave_pos = i;
          }
      } else {
        double best = -opt_tol;
        for (int i = 0; i < dim; ++i)
          if (mu(i) < best || (leave_pos >= 0 && mu(i) == best && W[i] < W[leave_pos])) {
            best = mu(i);
            leave_pos = i;
          }
      }
      if (leave_pos < 0) return EngineStatus::Optimal;

      // edge direction: R_W d = -e_k
      Vector d = -Binv.col(leave_pos);
      Vector step = R * d;  // step(r) > 0 shrinks slack of row r

      int enter = -1;
      double alpha = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows; ++r) {
        if (step(r) <= 1e-11) continue;
        if (in_working_set(r)) continue;
        double s = std::max(slack(r), 0.0);
        double ratio = s / step(r);
        if (ratio < alpha - 1e-12 * (1.0 + alpha)) {
          alpha = ratio;
          enter = r;
        } else if (enter >= 0 && ratio <= alpha + 1e-12 * (1.0 + alpha) && r < enter) {
          enter = r;  // least-index on ties
        }
      }
      if (enter < 0) return EngineStatus::NoBlockingRow;

      ++pivots;
      if (log)
        (*log) << "pivot " << pivots << ": leave row " << W[leave_pos] << " enter row " << enter
               << " step " << alpha << '\n';

      if (alpha <= 1e-12) {
        if (++degenerate_run >= kDegenerateSwitch) bland_mode = true;
      } else {
        degenerate_run = 0;
        bland_mode = false;
        x += alpha * d;
        slack -= alpha * step;
      }

      // Sherman-Morrison update for replacing row leave_pos of the basis.
      Vector delta = (R.row(enter) - R.row(W[leave_pos])).transpose();
      Vector w = Binv.col(leave_pos);
      double denom = 1.0 + delta.dot(w);
      W[leave_pos] = enter;
      if (std::abs(denom) < 1e-10 || ++since_refactor >= kRefactorInterval) {
        refactor();
      } else {
        Vector vt = Binv.transpose() * delta;
        Binv.noalias() -= (w * vt.transpose()) / denom;
        // pin the entering row exactly
        slack(enter) = 0.0;
      }
    }
  }
};

// Greedy crash: from a feasible point, walk to a vertex and return a working
// set of dim independent active rows. Maintains feasibility throughout.
struct CrashResult {
  Vector x;
  std::vector<int> W;
};

CrashResult crash_to_vertex(const Matrix& R, const Vector& rhs, const Vector& c, Vector x,
                            double feas_tol) {
  const int dim = static_cast<int>(R.cols());
  const int rows = static_cast<int>(R.rows());

  std::vector<int> W;
  Matrix ortho(dim, 0);  // orthonormal span of selected normals

  auto residual_norm = [&](const Vector& a) {
    Vector r = a;
    for (int j = 0; j < ortho.cols(); ++j) r -= ortho.col(j).dot(a) * ortho.col(j);
    return r;
  };
  auto try_add = [&](int row) {
    if (static_cast<int>(W.size()) >= dim) return false;
    Vector a = R.row(row).transpose();
    Vector r = residual_norm(a);
    double scale = std::max(1.0, a.norm());
    if (r.norm() <= 1e-9 * scale) return false;
    r.normalize();
    ortho.conservativeResize(Eigen::NoChange, ortho.cols() + 1);
    ortho.col(ortho.cols() - 1) = r;
    W.push_back(row);
    return true;
  };

  Vector slack = rhs - R * x;
  for (int r = 0; r < rows && static_cast<int>(W.size()) < dim; ++r)
    if (slack(r) <= feas_tol) try_add(r);

  while (static_cast<int>(W.size()) < dim) {
    // direction orthogonal to the selected normals
    Matrix full = Matrix::Identity(dim, dim);
    Vector d = Vector::Zero(dim);
    for (int j = 0; j < dim; ++j) {
      Vector cand = residual_norm(full.col(j));
      if (cand.norm() > 1e-8) {
        d = cand.normalized();
        break;
      }
    }
    if (d.isZero(0.0)) break;  // numerically full rank already
    if (c.dot(d) > 0) d = -d;

    Vector step = R * d;
    int block = -1;
    double alpha = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      if (step(r) <= 1e-11) continue;
      double s = std::max(slack(r), 0.0);
      double ratio = s / step(r);
      if (ratio < alpha - 1e-12 * (1.0 + alpha)) {
        alpha = ratio;
        block = r;
      } else if (block >= 0 && ratio <= alpha + 1e-12 * (1.0 + alpha) && r < block) {
        block = r;
      }
    }
    if (block < 0) {
      // Should not happen with box rows present; bail out with what we have.
      break;
    }
    x += alpha * d;
    slack -= alpha * step;
    try_add(block);
  }
  return {std::move(x), std::move(W)};
}

struct RawLp {
  Matrix R;
  Vector rhs;
  Vector c;
  int n;           // structural columns
  int program_rows;  // rows belonging to the program (before box rows)
};

// Assembles program rows followed by the internal +-var_bound box rows.
RawLp assemble(const program::ConvexProgram& prog, const Matrix& extra_rows,
               const Vector& extra_rhs, const SolverConfig& cfg) {
  const int n = prog.n;
  const int m = prog.linear_rows();
  const int e = static_cast<int>(extra_rows.rows());
  RawLp lp;
  lp.n = n;
  lp.program_rows = m;
  lp.R.resize(m + e + 2 * n, n);
  lp.rhs.resize(m + e + 2 * n);
  if (m > 0) {
    lp.R.topRows(m) = prog.A;
    lp.rhs.head(m) = prog.rhs;
  }
  if (e > 0) {
    lp.R.middleRows(m, e) = extra_rows;
    lp.rhs.segment(m, e) = extra_rhs;
  }
  for (int i = 0; i < n; ++i) {
    lp.R.row(m + e + 2 * i).setZero();
    lp.R(m + e + 2 * i, i) = 1.0;
    lp.rhs(m + e + 2 * i) = cfg.var_bound;
    lp.R.row(m + e + 2 * i + 1).setZero();
    lp.R(m + e + 2 * i + 1, i) = -1.0;
    lp.rhs(m + e + 2 * i + 1) = cfg.var_bound;
  }
  lp.c = prog.objective;
  return lp;
}

struct LpOutcome {
  Status status;
  Vector x;
  long pivots = 0;
  std::vector<int> basis;  // working set at termination (box/cut indices included)
};

// Two-phase solve of min c^T x s.t. R x <= rhs (box rows are the last 2n).
LpOutcome solve_raw(const RawLp& lp, const SolverConfig& cfg) {
  const int n = lp.n;
  const int total = static_cast<int>(lp.R.rows());
  LpOutcome out;
  out.status = Status::Infeasible;

  // start at the lower box corner
  Vector x0 = Vector::Constant(n, -cfg.var_bound);
  Vector resid = lp.R * x0 - lp.rhs;
  double worst = resid.maxCoeff();
  long pivots_used = 0;

  Vector feasible_x;
  if (worst <= cfg.feas_tol) {
    feasible_x = x0;
  } else {
    // Phase 1 in (x, tau): rows violated at x0 get a -tau column; satisfied
    // rows stay hard. tau >= -1 keeps the phase-1 LP bounded.
    Matrix R1(total + 1, n + 1);
    Vector rhs1(total + 1);
    R1.setZero();
    for (int r = 0; r < total; ++r) {
      R1.row(r).head(n) = lp.R.row(r);
      rhs1(r) = lp.rhs(r);
      if (resid(r) > cfg.feas_tol) R1(r, n) = -1.0;
    }
    R1(total, n) = -1.0;
    rhs1(total) = 1.0;
    Vector c1 = Vector::Zero(n + 1);
    c1(n) = 1.0;

    Vector x1(n + 1);
    x1.head(n) = x0;
    x1(n) = std::max(worst, -1.0) + 1e-12;

    CrashResult cr = crash_to_vertex(R1, rhs1, c1, x1, cfg.feas_tol);
    if (static_cast<int>(cr.W.size()) < n + 1) {
      throw ValidationError("solver: phase-1 crash failed to reach a vertex");
    }
    Engine eng(R1, rhs1, c1, cfg.max_pivots);
    eng.x = cr.x;
    eng.W = cr.W;
    EngineStatus st = eng.run();
    pivots_used += eng.pivots;
    if (st == EngineStatus::IterLimit) {
      out.status = Status::IterLimit;
      out.x = eng.x.head(n);
      out.pivots = pivots_used;
      return out;
    }
    double tau = eng.x(n);
    if (tau > cfg.feas_tol) {
      out.status = Status::Infeasible;
      out.pivots = pivots_used;
      return out;
    }
    feasible_x = eng.x.head(n);
  }

  // Phase 2
  CrashResult cr = crash_to_vertex(lp.R, lp.rhs, lp.c, feasible_x, cfg.feas_tol);
  if (static_cast<int>(cr.W.size()) < n)
    throw ValidationError("solver: phase-2 crash failed to reach a vertex");
  Engine eng(lp.R, lp.rhs, lp.c, cfg.max_pivots - pivots_used);
  eng.log = cfg.log;
  eng.x = cr.x;
  eng.W = cr.W;
  EngineStatus st = eng.run();
  pivots_used += eng.pivots;
  out.pivots = pivots_used;
  out.basis = eng.W;

  if (st == EngineStatus::IterLimit) {
    out.status = Status::IterLimit;
    out.x = eng.x;
    return out;
  }
  if (st == EngineStatus::NoBlockingRow) {
    out.status = Status::Unbounded;
    out.x = eng.x;
    return out;
  }

  // A binding internal box row means the genuine problem is unbounded.
  Vector mu = -(eng.Binv.transpose() * eng.c);
  for (int i = 0; i < n; ++i) {
    if (eng.W[i] >= total - 2 * n && mu(i) > 1e-7 * (1.0 + lp.c.lpNorm<Eigen::Infinity>())) {
      out.status = Status::Unbounded;
      out.x = eng.x;
      return out;
    }
  }
  out.status = Status::Optimal;
  out.x = eng.x;
  return out;
}

Solution finish_solution(const program::ConvexProgram& prog, const LpOutcome& raw,
                         const SolverConfig& cfg) {
  Solution sol;
  sol.status = raw.status;
  sol.iterations = raw.pivots;
  if (raw.x.size() == prog.n) {
    sol.x = raw.x;
    sol.objective = prog.objective.dot(raw.x);
    sol.active_rows = active_rows(prog, raw.x, cfg.active_tol);
    double mv = 0.0;
    if (prog.linear_rows() > 0) mv = (prog.A * raw.x - prog.rhs).maxCoeff();
    for (const auto& q : prog.quads) mv = std::max(mv, q.eval(raw.x));
    sol.max_violation = std::max(0.0, mv);
  }
  return sol;
}

}  // namespace

std::vector<int> active_rows(const program::ConvexProgram& prog, const Vector& x, double tol) {
  if (x.size() != prog.n) throw DimensionError("active_rows: x has wrong dimension");
  std::vector<int> idx;
  if (prog.linear_rows() > 0) {
    Vector resid = prog.A * x - prog.rhs;
    for (int r = 0; r < prog.linear_rows(); ++r)
      if (std::abs(resid(r)) <= tol) idx.push_back(r);
  }
  // Quadratic rows are enforced only to cut_tol by the cutting-plane loop, so
  // their activity is judged at the caller's tolerance against q(x).
  for (int q = 0; q < prog.quad_rows(); ++q)
    if (std::abs(prog.quads[q].eval(x)) <= tol) idx.push_back(prog.linear_rows() + q);
  return idx;
}

Solution solve_lp(const program::ConvexProgram& prog, const SolverConfig& cfg) {
  cfg.validate();
  prog.check_consistent();
  if (!prog.quads.empty())
    throw DomainError("solve_lp: program has quadratic rows; use solve_convex");
  RawLp lp = assemble(prog, Matrix(0, prog.n), Vector(0), cfg);
  LpOutcome raw = solve_raw(lp, cfg);
  return finish_solution(prog, raw, cfg);
}

Solution solve_convex(const program::ConvexProgram& prog, const SolverConfig& cfg) {
  cfg.validate();
  prog.check_consistent();
  if (prog.quads.empty()) return solve_lp(prog, cfg);

  for (const auto& q : prog.quads) q.check_psd();

  Matrix cuts(0, prog.n);
  Vector cut_rhs(0);
  long pivots = 0;
  LpOutcome raw;

  for (int iter = 0; iter < cfg.max_cuts; ++iter) {
    RawLp lp = assemble(prog, cuts, cut_rhs, cfg);
    raw = solve_raw(lp, cfg);
    pivots += raw.pivots;
    if (raw.status == Status::Infeasible || raw.status == Status::IterLimit) {
      raw.pivots = pivots;
      Solution sol = finish_solution(prog, raw, cfg);
      sol.iterations = pivots;
      return sol;
    }

    // violated quadratic rows at the relaxation optimum
    double worst = 0.0;
    int added = 0;
    for (const auto& q : prog.quads) {
      double viol = q.eval(raw.x);
      worst = std::max(worst, viol);
      if (viol > cfg.cut_tol) {
        Vector g = q.gradient(raw.x);
        if (g.norm() <= 1e-12) {
          // PSD row with positive minimum: no x can satisfy it
          raw.status = Status::Infeasible;
          raw.pivots = pivots;
          Solution sol = finish_solution(prog, raw, cfg);
          sol.status = Status::Infeasible;
          sol.iterations = pivots;
          return sol;
        }
        cuts.conservativeResize(cuts.rows() + 1, Eigen::NoChange);
        cuts.row(cuts.rows() - 1) = g.transpose();
        cut_rhs.conservativeResize(cut_rhs.size() + 1);
        cut_rhs(cut_rhs.size() - 1) = g.dot(raw.x) - viol;
        ++added;
      }
    }
    if (cfg.log) (*cfg.log) << "cut round " << iter << ": worst " << worst << " added " << added
                            << '\n';
    if (added == 0) {
      raw.pivots = pivots;
      Solution sol = finish_solution(prog, raw, cfg);
      sol.iterations = pivots;
      // quads are active at the cut tolerance, not the LP active tolerance
      for (int q = 0; q < prog.quad_rows(); ++q) {
        double v = std::abs(prog.quads[q].eval(raw.x));
        int id = prog.linear_rows() + q;
        if (v <= 10.0 * cfg.cut_tol &&
            std::find(sol.active_rows.begin(), sol.active_rows.end(), id) ==
                sol.active_rows.end())
          sol.active_rows.push_back(id);
      }
      std::sort(sol.active_rows.begin(), sol.active_rows.end());
      return sol;
    }
  }

  raw.pivots = pivots;
  Solution sol = finish_solution(prog, raw, cfg);
  sol.status = Status::IterLimit;
  sol.iterations = pivots;
  return sol;
}

}  // namespace gsp::solver
