#include "gridgame/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridgame {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kResidualTol = 1e-7;

// Rows of `lhs` that are linearly independent, chosen by column-pivoted QR of
// the transpose so the selection is deterministic.
std::vector<int> independent_rows(const Eigen::MatrixXd& lhs) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lhs.transpose());
  qr.setThreshold(kRankTol);
  const int rank = static_cast<int>(qr.rank());
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> rows(perm.data(), perm.data() + rank);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

std::vector<Eigen::VectorXd> enumerate_vertices(const Polytope& poly, double feas_tol,
                                                double dedup_tol, int dim_cap) {
  const int n = poly.dim();
  if (n > dim_cap)
    throw std::invalid_argument("enumerate_vertices: dimension " + std::to_string(n) +
                                " exceeds cap " + std::to_string(dim_cap));
  if (n == 0) return {};

  const std::vector<int> rows = independent_rows(poly.eq_lhs);
  const int r = static_cast<int>(rows.size());
  Eigen::MatrixXd lhs(r, n);
  Eigen::VectorXd rhs(r);
  for (int i = 0; i < r; ++i) {
    lhs.row(i) = poly.eq_lhs.row(rows[i]);
    rhs(i) = poly.eq_rhs(rows[i]);
  }

  std::vector<Eigen::VectorXd> vertices;
  if (r == 0) {
    if (poly.eq_rhs.lpNorm<Eigen::Infinity>() <= kResidualTol)
      vertices.push_back(Eigen::VectorXd::Zero(n));
    return vertices;
  }
  if (r > n) return vertices;

  // Lexicographic walk over all r-subsets of columns.
  std::vector<int> basis(r);
  for (int i = 0; i < r; ++i) basis[i] = i;
  Eigen::MatrixXd sub(r, r);
  while (true) {
    for (int i = 0; i < r; ++i) sub.col(i) = lhs.col(basis[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(kRankTol);
    if (lu.isInvertible()) {
      Eigen::VectorXd solved = lu.solve(rhs);
      if (solved.minCoeff() >= -feas_tol) {
        Eigen::VectorXd vertex = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < r; ++i) vertex(basis[i]) = std::max(solved(i), 0.0);
        if ((poly.eq_lhs * vertex - poly.eq_rhs).lpNorm<Eigen::Infinity>() <= kResidualTol) {
          bool seen = false;
          for (const auto& known : vertices)
            if ((known - vertex).lpNorm<Eigen::Infinity>() <= dedup_tol) {
              seen = true;
              break;
            }
          if (!seen) vertices.push_back(std::move(vertex));
        }
      }
    }
    // advance the combination
    int pos = r - 1;
    while (pos >= 0 && basis[pos] == n - r + pos) --pos;
    if (pos < 0) break;
    ++basis[pos];
    for (int i = pos + 1; i < r; ++i) basis[i] = basis[i - 1] + 1;
  }
  return vertices;
}

namespace {

// Tableau simplex core: maximizes cost over the current tableau, pivoting with
// Bland's rule.  `tableau` is [B^-1 A | B^-1 b]; basis[i] names the variable
// in row i.  Returns false when the program is unbounded.
bool simplex_core(Eigen::MatrixXd& tableau, std::vector<int>& basis,
                  const Eigen::VectorXd& cost) {
  const int m = static_cast<int>(tableau.rows());
  const int n = static_cast<int>(tableau.cols()) - 1;
  constexpr double kPivotTol = 1e-9;
  while (true) {
    Eigen::VectorXd basic_cost(m);
    for (int i = 0; i < m; ++i) basic_cost(i) = cost(basis[i]);
    int entering = -1;
    for (int j = 0; j < n && entering < 0; ++j) {
      bool is_basic = false;
      for (int i = 0; i < m; ++i)
        if (basis[i] == j) {
          is_basic = true;
          break;
        }
      if (is_basic) continue;
      const double reduced = cost(j) - basic_cost.dot(tableau.col(j));
      if (reduced > kPivotTol) entering = j;  // Bland: first improving index
    }
    if (entering < 0) return true;  // optimal

    int leaving = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = tableau(i, entering);
      if (a <= kPivotTol) continue;
      const double ratio = tableau(i, n) / a;
      if (leaving < 0 || ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && basis[i] < basis[leaving])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    if (leaving < 0) return false;  // unbounded direction

    tableau.row(leaving) /= tableau(leaving, entering);
    for (int i = 0; i < m; ++i) {
      if (i == leaving) continue;
      const double factor = tableau(i, entering);
      if (factor != 0.0) tableau.row(i) -= factor * tableau.row(leaving);
    }
    basis[leaving] = entering;
  }
}

}  // namespace

LpResult simplex_maximize(const Eigen::MatrixXd& eq_lhs, const Eigen::VectorXd& eq_rhs,
                          const Eigen::VectorXd& objective) {
  const int m = static_cast<int>(eq_lhs.rows());
  const int n = static_cast<int>(eq_lhs.cols());
  LpResult result;

  // Phase 1: make the rhs nonnegative, then start from an artificial basis.
  Eigen::MatrixXd lhs = eq_lhs;
  Eigen::VectorXd rhs = eq_rhs;
  for (int i = 0; i < m; ++i)
    if (rhs(i) < 0.0) {
      lhs.row(i) = -lhs.row(i);
      rhs(i) = -rhs(i);
    }
  Eigen::MatrixXd tableau(m, n + m + 1);
  tableau.leftCols(n) = lhs;
  tableau.middleCols(n, m) = Eigen::MatrixXd::Identity(m, m);
  tableau.col(n + m) = rhs;

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
  phase1_cost.tail(m).setConstant(-1.0);
  simplex_core(tableau, basis, phase1_cost);

  double infeasibility = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n) infeasibility += tableau(i, n + m);
  if (infeasibility > 1e-7) return result;  // infeasible
  result.feasible = true;

  // Drive leftover artificials out of the basis (degenerate rows).
  std::vector<int> keep_rows;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) {
      keep_rows.push_back(i);
      continue;
    }
    int pivot_col = -1;
    for (int j = 0; j < n && pivot_col < 0; ++j)
      if (std::abs(tableau(i, j)) > 1e-9) pivot_col = j;
    if (pivot_col < 0) continue;  // redundant constraint; drop the row
    tableau.row(i) /= tableau(i, pivot_col);
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      const double factor = tableau(k, pivot_col);
      if (factor != 0.0) tableau.row(k) -= factor * tableau.row(i);
    }
    basis[i] = pivot_col;
    keep_rows.push_back(i);
  }

  const int m2 = static_cast<int>(keep_rows.size());
  Eigen::MatrixXd tableau2(m2, n + 1);
  std::vector<int> basis2(m2);
  for (int i = 0; i < m2; ++i) {
    tableau2.row(i).head(n) = tableau.row(keep_rows[i]).head(n);
    tableau2(i, n) = tableau(keep_rows[i], n + m);
    basis2[i] = basis[keep_rows[i]];
  }

  result.bounded = simplex_core(tableau2, basis2, objective);
  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m2; ++i) result.x(basis2[i]) = std::max(tableau2(i, n), 0.0);
  result.objective = objective.dot(result.x);
  return result;
}

Eigen::VectorXd chebyshev_center(const Polytope& poly, double* radius_out) {
  const int n = poly.dim();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(poly.eq_lhs);
  cod.setThreshold(kRankTol);
  Eigen::VectorXd anchor = cod.solve(poly.eq_rhs);
  if ((poly.eq_lhs * anchor - poly.eq_rhs).lpNorm<Eigen::Infinity>() > kResidualTol)
    throw std::invalid_argument("chebyshev_center: inconsistent equality system");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(poly.eq_lhs, Eigen::ComputeFullV);
  svd.setThreshold(kRankTol);
  const int rank = static_cast<int>(svd.rank());
  const int d = n - rank;
  if (d == 0) {
    if (anchor.minCoeff() < -kResidualTol)
      throw std::invalid_argument("chebyshev_center: empty polytope");
    if (radius_out) *radius_out = 0.0;
    return anchor;
  }
  const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(d);

  // Inequalities in walk coordinates: row_i . y >= -anchor_i.  The inscribed
  // ball of radius R needs row_i . y - |row_i| R >= -anchor_i for every i.
  // Cast as a standard-form LP over (y+, y-, R, slack), maximizing R.
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (null_basis.row(i).norm() > kRankTol) {
      active.push_back(i);
    } else if (anchor(i) < -kResidualTol) {
      throw std::invalid_argument("chebyshev_center: empty polytope");
    }
  }
  const int rows = static_cast<int>(active.size());
  const int vars = 2 * d + 1 + rows;
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd rhs(rows);
  for (int i = 0; i < rows; ++i) {
    const auto row = null_basis.row(active[i]);
    lhs.block(i, 0, 1, d) = row;
    lhs.block(i, d, 1, d) = -row;
    lhs(i, 2 * d) = -row.norm();
    lhs(i, 2 * d + 1 + i) = -1.0;
    rhs(i) = -anchor(active[i]);
  }
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(vars);
  objective(2 * d) = 1.0;

  const LpResult lp = simplex_maximize(lhs, rhs, objective);
  if (!lp.feasible) throw std::invalid_argument("chebyshev_center: empty polytope");
  if (!lp.bounded) throw std::logic_error("chebyshev_center: unbounded radius");
  const Eigen::VectorXd y = lp.x.head(d) - lp.x.segment(d, d);
  if (radius_out) *radius_out = lp.x(2 * d);
  return anchor + null_basis * y;
}

HitAndRunSampler::HitAndRunSampler(Polytope poly, std::uint64_t seed, int burn_in)
    : poly_(std::move(poly)), burn_in_(burn_in), rng_(seed) {
  const int n = poly_.dim();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(poly_.eq_lhs, Eigen::ComputeFullV);
  svd.setThreshold(kRankTol);
  const int d = n - static_cast<int>(svd.rank());
  basis_ = svd.matrixV().rightCols(d);
  point_ = chebyshev_center(poly_, &start_radius_);
  anchor_ = point_;
}

void HitAndRunSampler::step() {
  const int d = walk_dim();
  if (d == 0) return;
  Eigen::VectorXd dir_walk(d);
  for (int i = 0; i < d; ++i) dir_walk(i) = rng_.normal();
  const double norm = dir_walk.norm();
  if (norm < 1e-300) return;
  const Eigen::VectorXd dir = basis_ * (dir_walk / norm);

  // Feasible chord {point + t dir : all coordinates stay nonnegative}.
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < point_.size(); ++i) {
    const double u = dir(i);
    if (u > 1e-13) {
      t_lo = std::max(t_lo, -point_(i) / u);
    } else if (u < -1e-13) {
      t_hi = std::min(t_hi, -point_(i) / u);
    } else if (point_(i) < -1e-9) {
      return;  // outside along a frozen coordinate; should not happen
    }
  }
  if (!(t_hi > t_lo) || !std::isfinite(t_lo) || !std::isfinite(t_hi)) return;
  point_ += (t_lo + rng_.uniform() * (t_hi - t_lo)) * dir;

  if (++steps_since_projection_ >= 1000) {
    // Pull accumulated floating-point drift back onto the affine hull.
    point_ = anchor_ + basis_ * (basis_.transpose() * (point_ - anchor_));
    point_ = point_.cwiseMax(0.0);
    steps_since_projection_ = 0;
  }
}

Eigen::VectorXd HitAndRunSampler::sample() {
  for (int i = 0; i < burn_in_; ++i) step();
  return point_.cwiseMax(0.0);
}

}  // namespace gridgame
