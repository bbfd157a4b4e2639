#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crpnet/errors.hpp"

namespace crpnet {

struct LpSolution {
  Eigen::VectorXd v;       // optimal point
  double objective = 0.0;
  // True when every nonbasic column has strictly positive reduced cost at
  // the optimum. A zero reduced cost means an alternate optimal basis
  // exists (possibly degenerate), so false is a conservative signal.
  bool unique = false;
  std::vector<int> basis;  // basic variable per row, after redundant rows drop
};

// Minimize cost'v subject to eq*v = rhs, v >= 0, by two-phase dense simplex
// with Bland's rule over exact rationals. Every finite double converts to a
// rational exactly, so pivoting involves no roundoff and the uniqueness
// test (reduced cost == 0) is a decidable comparison. Intended for
// desk-scale problems (tens of rows/columns).
//
// Throws InfeasibleError when no feasible point exists. Unbounded problems
// throw DomainError (they cannot arise from well-posed inputs here).
LpSolution solve_equality_lp(const Eigen::MatrixXd& eq,
                             const Eigen::VectorXd& rhs,
                             const Eigen::VectorXd& cost);

}  // namespace crpnet
