#include "crpnet/simplex.hpp"

#include <gmpxx.h>

#include <limits>

namespace crpnet {

namespace {

using Rational = mpq_class;
using Tableau = std::vector<std::vector<Rational>>;

// T holds B^{-1}*columns; b holds B^{-1}*rhs. One Gauss-Jordan pivot.
void pivot(Tableau& t, std::vector<Rational>& b, std::vector<int>& basis,
           int row, int col) {
  const std::size_t rows = t.size();
  const std::size_t cols = t[0].size();
  const Rational piv = t[row][col];
  for (std::size_t c = 0; c < cols; ++c) t[row][c] /= piv;
  b[row] /= piv;
  for (std::size_t r = 0; r < rows; ++r) {
    if (r == static_cast<std::size_t>(row)) continue;
    const Rational factor = t[r][col];
    if (factor == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) t[r][c] -= factor * t[row][c];
    b[r] -= factor * b[row];
  }
  basis[row] = col;
}

std::vector<Rational> reduced_costs(const Tableau& t,
                                    const std::vector<Rational>& cost,
                                    const std::vector<int>& basis) {
  const std::size_t rows = t.size();
  const std::size_t cols = t[0].size();
  std::vector<Rational> rc(cost);
  for (std::size_t r = 0; r < rows; ++r) {
    const Rational cb = cost[basis[r]];
    if (cb == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) rc[c] -= cb * t[r][c];
  }
  return rc;
}

// Bland's rule: entering = lowest index with negative reduced cost; leaving
// = minimum ratio, ties broken by lowest basic variable index. Terminates
// on degenerate problems.
void run_simplex(Tableau& t, std::vector<Rational>& b,
                 const std::vector<Rational>& cost, std::vector<int>& basis) {
  const std::size_t rows = t.size();
  const std::size_t cols = t[0].size();
  for (;;) {
    const std::vector<Rational> rc = reduced_costs(t, cost, basis);
    int entering = -1;
    for (std::size_t c = 0; c < cols; ++c) {
      if (rc[c] < 0) {
        entering = static_cast<int>(c);
        break;
      }
    }
    if (entering < 0) return;

    int leaving = -1;
    Rational best_ratio;
    for (std::size_t r = 0; r < rows; ++r) {
      if (t[r][entering] > 0) {
        const Rational ratio = b[r] / t[r][entering];
        if (leaving < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis[r] < basis[leaving])) {
          leaving = static_cast<int>(r);
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) {
      throw DomainError("linear program is unbounded");
    }
    pivot(t, b, basis, leaving, entering);
  }
}

}  // namespace

LpSolution solve_equality_lp(const Eigen::MatrixXd& eq,
                             const Eigen::VectorXd& rhs,
                             const Eigen::VectorXd& cost) {
  const int rows0 = static_cast<int>(eq.rows());
  const int nvars = static_cast<int>(eq.cols());
  if (rhs.size() != rows0 || cost.size() != nvars) {
    throw DomainError("LP dimensions disagree");
  }

  // Phase 1 tableau: [eq | I] with artificials basic; rows flipped so the
  // right-hand side is nonnegative.
  Tableau t(rows0, std::vector<Rational>(nvars + rows0, Rational(0)));
  std::vector<Rational> b(rows0);
  for (int r = 0; r < rows0; ++r) {
    const double sign = rhs(r) < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < nvars; ++c) t[r][c] = Rational(sign * eq(r, c));
    t[r][nvars + r] = 1;
    b[r] = Rational(sign * rhs(r));
  }
  std::vector<int> basis(rows0);
  for (int r = 0; r < rows0; ++r) basis[r] = nvars + r;

  std::vector<Rational> phase1_cost(nvars + rows0, Rational(0));
  for (int r = 0; r < rows0; ++r) phase1_cost[nvars + r] = 1;
  run_simplex(t, b, phase1_cost, basis);

  Rational artificial_sum(0);
  for (int r = 0; r < rows0; ++r) {
    if (basis[r] >= nvars) artificial_sum += b[r];
  }
  if (artificial_sum != 0) {
    throw InfeasibleError("static planning problem has no feasible point");
  }

  // Drive remaining artificials out of the basis; a row where no structural
  // column can pivot is redundant and gets dropped.
  for (int r = static_cast<int>(t.size()) - 1; r >= 0; --r) {
    if (basis[r] < nvars) continue;
    int col = -1;
    for (int c = 0; c < nvars; ++c) {
      if (t[r][c] != 0) {
        col = c;
        break;
      }
    }
    if (col >= 0) {
      pivot(t, b, basis, r, col);
    } else {
      t.erase(t.begin() + r);
      b.erase(b.begin() + r);
      basis.erase(basis.begin() + r);
    }
  }

  // Phase 2 on structural columns only.
  for (auto& row : t) row.resize(nvars);
  std::vector<Rational> phase2_cost(nvars);
  for (int c = 0; c < nvars; ++c) phase2_cost[c] = Rational(cost(c));
  run_simplex(t, b, phase2_cost, basis);

  LpSolution sol;
  sol.v = Eigen::VectorXd::Zero(nvars);
  for (std::size_t r = 0; r < t.size(); ++r) {
    sol.v(basis[r]) = b[r].get_d();
  }
  Rational objective(0);
  for (std::size_t r = 0; r < t.size(); ++r) objective += phase2_cost[basis[r]] * b[r];
  sol.objective = objective.get_d();
  sol.basis = basis;

  const std::vector<Rational> rc = reduced_costs(t, phase2_cost, basis);
  sol.unique = true;
  std::vector<bool> is_basic(nvars, false);
  for (int v : basis) is_basic[v] = true;
  for (int c = 0; c < nvars; ++c) {
    if (!is_basic[c] && rc[c] == 0) {
      sol.unique = false;
      break;
    }
  }
  return sol;
}

}  // namespace crpnet
