#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crpnet/network.hpp"

namespace crpnet {

// Output of the static planning problem: minimize peak utilization rho over
// processing rates x with io_matrix*x = lambda, capacity*x <= rho*e, x >= 0.
struct StaticLpResult {
  Eigen::VectorXd rates;     // x*, size n
  double utilization = 0.0;  // rho*
  std::vector<int> basic;    // activities with x*_j above threshold, ascending
};

struct AssumptionReport {
  bool heavy_traffic = false;  // unique optimum with rho* = 1 and Ax* = e
  bool crp = false;            // b == p + m - 1
  bool bab = false;            // every buffer drained by some basic activity
  std::string detail;
  bool all() const { return heavy_traffic && crp && bab; }
};

struct DualSolution {
  Eigen::VectorXd workload_weights;  // y, size m, > 0
  Eigen::VectorXd server_weights;    // pi, size p, > 0, sums to 1
  Eigen::VectorXd nonbasic_margin;   // eta = (pi'N - y'J)', size n-b, >= 0
};

// Everything the review policy needs, precomputed once. All buffer-indexed
// quantities live in the permuted coordinates where holding cost per unit
// workload is nondecreasing (h_1/y_1 <= h_2/y_2 <= ...); `net` is the
// permuted network and `buffer_perm[i]` is the original label of permuted
// buffer i.
struct StaticPlan {
  NetworkSpec net;
  std::vector<int> buffer_perm;

  Eigen::VectorXd rates;  // x*
  double utilization = 0.0;
  std::vector<int> basic;     // ascending activity indices
  std::vector<int> nonbasic;  // complement, ascending

  Eigen::MatrixXd h_basic;     // R columns of basic activities, m x b
  Eigen::MatrixXd j_nonbasic;  // R columns of nonbasic activities
  Eigen::MatrixXd b_basic;     // A columns of basic activities, p x b
  Eigen::MatrixXd n_nonbasic;  // A columns of nonbasic activities

  Eigen::VectorXd workload_weights;  // y
  Eigen::VectorXd server_weights;    // pi
  Eigen::VectorXd nonbasic_margin;   // eta

  Eigen::MatrixXd policy_matrix;      // [[H, e1], [B, 0]], (m+p) x (b+1)
  Eigen::MatrixXd policy_matrix_inv;

  double c0 = 0.0;  // safety-stock sizing constants
  double c1 = 0.0;
  Eigen::VectorXd safety_stock_rate;  // per-buffer stock per unit period length
  double delta = 0.0;                 // ball-radius coefficient actually used
  double delta_bound = 0.0;           // strict upper limit delta must stay below

  double eps1_min = 0.0;  // most restrictive declared moment exponent

  int num_basic() const { return static_cast<int>(basic.size()); }
  Eigen::VectorXd basic_rates() const;  // x* restricted to basic activities
};

// Tolerances pinned for the whole pipeline.
inline constexpr double kBasicThreshold = 1e-9;   // x*_j above this is basic
inline constexpr double kHeavyTrafficTol = 1e-9;  // |rho*-1| and |Ax*-e|
inline constexpr double kInverseTol = 1e-12;      // policy-matrix identity residual
inline constexpr double kDualPositiveTol = 1e-10;

// Solves the static planning problem. Throws InfeasibleError when no
// x >= 0 satisfies io_matrix*x = lambda, and NonUniqueError when an
// alternate optimum exists (which violates the heavy traffic assumption).
StaticLpResult solve_static_plan(const NetworkSpec& net);

AssumptionReport verify_assumptions(const StaticLpResult& lp, const NetworkSpec& net);

// Solves y'H = pi'B with pi'e = 1; under complete resource pooling the
// system plus normalization pins a unique ray. Enforces strict positivity
// and returns eta = (pi'N - y'J)'. Throws DegenerateDualError otherwise.
DualSolution compute_duals(const StaticLpResult& lp, const NetworkSpec& net);

// Builds the policy matrix [[H, e1],[B, 0]] and its inverse. Throws
// SingularError when the inverse does not exist or fails the identity
// residual check (which signals an upstream assumption failure).
void build_policy_matrix(const Eigen::MatrixXd& h_basic,
                         const Eigen::MatrixXd& b_basic,
                         Eigen::MatrixXd* policy_matrix,
                         Eigen::MatrixXd* policy_matrix_inv);

struct PolicyConstants {
  double c0 = 0.0;
  double c1 = 0.0;
  Eigen::VectorXd safety_stock_rate;
  double delta = 0.0;
  double delta_bound = 0.0;
};

PolicyConstants compute_constants(const Eigen::MatrixXd& policy_matrix_inv,
                                  const Eigen::VectorXd& rates,
                                  const std::vector<int>& basic,
                                  const Eigen::VectorXd& workload_weights,
                                  const NetworkSpec& net);

// Permutation sorting buffers by h_i/y_i ascending, ties by original index;
// perm[i_new] = i_old.
std::vector<int> order_buffers(const NetworkSpec& net, const Eigen::VectorXd& workload_weights);

// Full pipeline: validate, solve, verify assumptions, compute duals,
// apply the buffer ordering, and rebuild everything in permuted
// coordinates. Throws on any failed assumption.
StaticPlan make_static_plan(const NetworkSpec& net);

}  // namespace crpnet
