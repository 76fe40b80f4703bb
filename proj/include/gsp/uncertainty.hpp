#ifndef GSP_UNCERTAINTY_HPP
#define GSP_UNCERTAINTY_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gsp/common.hpp"
#include "gsp/sizing.hpp"

namespace gsp::uncertainty {

class EmptySetError : public std::runtime_error {
 public:
  explicit EmptySetError(const std::string& what) : std::runtime_error(what) {}
};

class UnboundedSetError : public std::runtime_error {
 public:
  explicit UnboundedSetError(const std::string& what) : std::runtime_error(what) {}
};

class SingularMapError : public std::runtime_error {
 public:
  explicit SingularMapError(const std::string& what) : std::runtime_error(what) {}
};

/** Rejection sampling stalled: the polytope fills < 1e-4 of its bounding box. */
class RejectionEfficiencyError : public std::runtime_error {
 public:
  explicit RejectionEfficiencyError(const std::string& what) : std::runtime_error(what) {}
};

struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& u, double tol = 1e-9) const;
  void validate() const;
};

/** Polytope {u | G u <= g0} together with a box known to contain it. */
struct Polytope {
  Matrix G;
  Vector g0;
  Box bounding_box;

  int dim() const { return static_cast<int>(G.cols()); }
  bool contains(const Vector& u, double tol = 1e-9) const;
};

/**
 * Exogenous uncertainty set: either an axis-aligned box or a polytope with a
 * bounding box. Polytope construction runs a feasibility probe (empty sets are
 * rejected) and verifies the bounding box by per-coordinate LPs.
 */
class UncertaintySet {
 public:
  static UncertaintySet box(Vector lower, Vector upper);
  static UncertaintySet polytope(Matrix G, Vector g0, Box bounding_box);
  // bounding box derived from per-coordinate LPs instead of being supplied
  static UncertaintySet polytope_autobox(Matrix G, Vector g0);

  bool is_box() const { return std::holds_alternative<Box>(rep_); }
  const Box& as_box() const { return std::get<Box>(rep_); }
  const Polytope& as_polytope() const { return std::get<Polytope>(rep_); }

  int dim() const;
  bool contains(const Vector& u, double tol = 1e-9) const;
  const Box& bounding_box() const;

 private:
  UncertaintySet() = default;
  std::variant<Box, Polytope> rep_;
};

/** Decision-dependent set V(x) = {v | Gv v + Gx x - g0 <= 0}. */
struct EndogenousSet {
  Matrix Gv;  // s x J
  Matrix Gx;  // s x n
  Vector g0;  // s

  int rows() const { return static_cast<int>(Gv.rows()); }
  int enu_dim() const { return static_cast<int>(Gv.cols()); }
  int decision_dim() const { return static_cast<int>(Gx.cols()); }
  void validate() const;
};

/** Affine map h(x) = A x + b. */
struct AffineMap {
  Matrix A;  // J x n
  Vector b;  // J

  int out_dim() const { return static_cast<int>(A.rows()); }
  int in_dim() const { return static_cast<int>(A.cols()); }
  Vector operator()(const Vector& x) const { return A * x + b; }
};

enum class ScenarioSource { RandomUniform, PDGrid, External };

/** A batch of sampled scenarios, one per row. */
struct ScenarioSet {
  Matrix points;  // count x dim
  ScenarioSource source = ScenarioSource::External;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> names;  // per-variable CSV header names

  int count() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  Vector scenario(int i) const { return points.row(i).transpose(); }
  ScenarioSet subset(const std::vector<int>& indices) const;
};

/**
 * count i.i.d. uniform points from the set; boxes sample each coordinate
 * independently, polytopes sample the bounding box and reject. Deterministic
 * for a fixed seed.
 */
ScenarioSet sample_uniform(const UncertaintySet& set, int count, std::uint64_t seed);

/** Grid count would exceed the materialization cap; carries the full count. */
class GridCapExceeded : public std::runtime_error {
 public:
  GridCapExceeded(const std::string& what, sizing::BigCount required)
      : std::runtime_error(what), required_(required) {}
  const sizing::BigCount& required() const { return required_; }

 private:
  sizing::BigCount required_;
};

/**
 * Cartesian product of b evenly spaced points per variable (endpoints
 * included for b >= 2, the midpoint for b = 1). Throws GridCapExceeded
 * before materializing anything larger than cap.
 */
ScenarioSet grid_samples(const std::vector<std::pair<double, double>>& marginals, int b,
                         std::int64_t cap = 1'000'000);

/**
 * Rewrites V(x) through an invertible affine mapping v = h(x): substituting
 * x = A^{-1}(v - b) yields the decision-free polytope
 *     {v | (Gv + Gx A^{-1}) v <= g0 + Gx A^{-1} b}.
 * The result carries a freshly computed bounding box; unbounded or empty
 * reformulations are rejected.
 */
UncertaintySet reformulate_enu(const EndogenousSet& env, const AffineMap& h,
                               double condition_cap = 1e12);

struct AffineFit {
  AffineMap map;
  double rms = 0.0;           // root-mean-square residual over all outputs
  bool ridge_fallback = false;  // normal system was singular; ridge (1e-8) used
};

/** Least-squares fit of v ~ A x + b from (x, v) observations. */
AffineFit fit_affine_map(const std::vector<std::pair<Vector, Vector>>& pairs);

// CSV round trip: '#' metadata comment, header row, one scenario per row.
void write_csv(const ScenarioSet& set, std::ostream& out);
ScenarioSet read_csv(std::istream& in);

}  // namespace gsp::uncertainty

#endif  // GSP_UNCERTAINTY_HPP
