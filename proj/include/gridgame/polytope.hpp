#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gridgame/random.hpp"

namespace gridgame {

// Standard-form polytope {x : eq_lhs * x = eq_rhs, x >= 0}.
struct Polytope {
  Eigen::MatrixXd eq_lhs;
  Eigen::VectorXd eq_rhs;

  int dim() const { return static_cast<int>(eq_lhs.cols()); }
};

/**
 * All vertices (basic feasible solutions) of a standard-form polytope, found
 * by exhaustively solving every nonsingular basis of the independent equality
 * rows.  Exponential in the dimension and therefore capped: dimensions above
 * `dim_cap` throw std::invalid_argument.  Near-duplicate solutions within
 * `dedup_tol` (infinity norm) are merged, keeping first-found order, which is
 * deterministic (bases are visited lexicographically).
 */
std::vector<Eigen::VectorXd> enumerate_vertices(const Polytope& poly,
                                                double feas_tol = 1e-9,
                                                double dedup_tol = 1e-9,
                                                int dim_cap = 16);

struct LpResult {
  bool feasible = false;
  bool bounded = false;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase primal simplex with Bland's rule, maximizing
// objective . x over {eq_lhs x = eq_rhs, x >= 0}.  Intended for the small
// auxiliary programs that arise here (tens of variables).
LpResult simplex_maximize(const Eigen::MatrixXd& eq_lhs, const Eigen::VectorXd& eq_rhs,
                          const Eigen::VectorXd& objective);

// Center of the largest ball inscribed in the polytope's affine hull (radius
// measured inside the hull).  Returns the center; `radius_out`, when given,
// receives the radius, which is 0 for degenerate (lower-dimensional) sets.
Eigen::VectorXd chebyshev_center(const Polytope& poly, double* radius_out = nullptr);

/**
 * Hit-and-run random walk over a standard-form polytope, operating in an
 * orthonormal basis of the equality rows' null space.  Each sample() advances
 * the chain `burn_in` steps and returns the current point; the first call
 * therefore performs the initial burn-in from the Chebyshev-center start.
 */
class HitAndRunSampler {
 public:
  HitAndRunSampler(Polytope poly, std::uint64_t seed, int burn_in = 1000);

  Eigen::VectorXd sample();

  // Dimension of the walk (null-space dimension); 0 means the polytope's
  // affine hull is a single point.
  int walk_dim() const { return static_cast<int>(basis_.cols()); }
  double start_radius() const { return start_radius_; }

 private:
  void step();

  Polytope poly_;
  Eigen::MatrixXd basis_;   // columns: orthonormal null-space directions
  Eigen::VectorXd anchor_;  // particular solution of the equalities
  Eigen::VectorXd point_;
  double start_radius_ = 0.0;
  int burn_in_;
  long steps_since_projection_ = 0;
  Rng rng_;
};

}  // namespace gridgame
