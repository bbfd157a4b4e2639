#include "crpnet/static_plan.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "crpnet/simplex.hpp"

namespace crpnet {

Eigen::VectorXd StaticPlan::basic_rates() const {
  Eigen::VectorXd xb(num_basic());
  for (int i = 0; i < num_basic(); ++i) xb(i) = rates(basic[i]);
  return xb;
}

StaticLpResult solve_static_plan(const NetworkSpec& net) {
  if (!net.derived_ready) {
    throw StructuralError("network must be validated before planning");
  }
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int n = net.num_activities;

  // Standard form over v = [x, rho, slack]:
  //   R x           = lambda
  //   A x - rho e + s = 0
  // minimizing rho, all variables nonnegative.
  const int nvars = n + 1 + p;
  Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(m + p, nvars);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + p);
  eq.block(0, 0, m, n) = net.io_matrix;
  rhs.head(m) = net.arrival_rate;
  eq.block(m, 0, p, n) = net.capacity;
  eq.block(m, n, p, 1) = -Eigen::VectorXd::Ones(p);
  eq.block(m, n + 1, p, p) = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nvars);
  cost(n) = 1.0;

  const LpSolution sol = solve_equality_lp(eq, rhs, cost);
  if (!sol.unique) {
    throw NonUniqueError(
        "static planning problem has an alternate optimum (zero reduced cost "
        "at a nonbasic column)");
  }

  StaticLpResult out;
  out.rates = sol.v.head(n);
  out.utilization = sol.v(n);
  for (int j = 0; j < n; ++j) {
    if (out.rates(j) > kBasicThreshold) out.basic.push_back(j);
  }
  return out;
}

AssumptionReport verify_assumptions(const StaticLpResult& lp, const NetworkSpec& net) {
  AssumptionReport rep;
  std::ostringstream detail;

  const Eigen::VectorXd load = net.capacity * lp.rates;
  const double load_gap = (load - Eigen::VectorXd::Ones(net.num_servers)).cwiseAbs().maxCoeff();
  rep.heavy_traffic =
      std::abs(lp.utilization - 1.0) <= kHeavyTrafficTol && load_gap <= kHeavyTrafficTol;
  if (!rep.heavy_traffic) {
    detail << "heavy traffic fails: rho*=" << lp.utilization
           << ", max |Ax*-e|=" << load_gap << ". ";
  }

  const int b = static_cast<int>(lp.basic.size());
  rep.crp = (b == net.num_servers + net.num_buffers - 1);
  if (!rep.crp) {
    detail << "resource pooling fails: " << b << " basic activities, need "
           << net.num_servers + net.num_buffers - 1 << ". ";
  }

  rep.bab = true;
  for (int i = 0; i < net.num_buffers; ++i) {
    bool drained = false;
    for (int j : lp.basic) {
      if (net.io_matrix(i, j) > kBasicThreshold) {
        drained = true;
        break;
      }
    }
    if (!drained) {
      rep.bab = false;
      detail << "buffer " << i << " has no basic activity draining it. ";
    }
  }

  rep.detail = detail.str();
  return rep;
}

namespace {

void partition_columns(const NetworkSpec& net, const std::vector<int>& basic,
                       std::vector<int>* nonbasic, Eigen::MatrixXd* h,
                       Eigen::MatrixXd* j_non, Eigen::MatrixXd* b_mat,
                       Eigen::MatrixXd* n_mat) {
  const int n = net.num_activities;
  nonbasic->clear();
  std::vector<bool> is_basic(n, false);
  for (int j : basic) is_basic[j] = true;
  for (int j = 0; j < n; ++j) {
    if (!is_basic[j]) nonbasic->push_back(j);
  }
  const int b = static_cast<int>(basic.size());
  const int nb = static_cast<int>(nonbasic->size());
  h->resize(net.num_buffers, b);
  b_mat->resize(net.num_servers, b);
  for (int i = 0; i < b; ++i) {
    h->col(i) = net.io_matrix.col(basic[i]);
    b_mat->col(i) = net.capacity.col(basic[i]);
  }
  j_non->resize(net.num_buffers, nb);
  n_mat->resize(net.num_servers, nb);
  for (int i = 0; i < nb; ++i) {
    j_non->col(i) = net.io_matrix.col((*nonbasic)[i]);
    n_mat->col(i) = net.capacity.col((*nonbasic)[i]);
  }
}

}  // namespace

DualSolution compute_duals(const StaticLpResult& lp, const NetworkSpec& net) {
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int b = static_cast<int>(lp.basic.size());

  std::vector<int> nonbasic;
  Eigen::MatrixXd h, j_non, b_mat, n_mat;
  partition_columns(net, lp.basic, &nonbasic, &h, &j_non, &b_mat, &n_mat);

  // Unknown u = [y; pi]: one equation per basic activity (y'H = pi'B) plus
  // the normalization pi'e = 1. Under resource pooling this is square.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(b + 1, m + p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b + 1);
  sys.block(0, 0, b, m) = h.transpose();
  sys.block(0, m, b, p) = -b_mat.transpose();
  sys.block(b, m, 1, p) = Eigen::RowVectorXd::Ones(p);
  rhs(b) = 1.0;

  if (b + 1 != m + p) {
    throw DegenerateDualError("dual system is not square; resource pooling fails");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) {
    throw DegenerateDualError("dual system rank deficient beyond normalization");
  }
  const Eigen::VectorXd u = lu.solve(rhs);

  DualSolution dual;
  dual.workload_weights = u.head(m);
  dual.server_weights = u.tail(p);
  if (dual.workload_weights.minCoeff() <= kDualPositiveTol ||
      dual.server_weights.minCoeff() <= kDualPositiveTol) {
    throw DegenerateDualError("dual solution fails strict positivity");
  }
  dual.nonbasic_margin =
      (dual.server_weights.transpose() * n_mat - dual.workload_weights.transpose() * j_non)
          .transpose();
  if (dual.nonbasic_margin.size() > 0 && dual.nonbasic_margin.minCoeff() < -1e-9) {
    throw DegenerateDualError("dual feasibility fails on a nonbasic activity");
  }
  return dual;
}

void build_policy_matrix(const Eigen::MatrixXd& h_basic,
                         const Eigen::MatrixXd& b_basic,
                         Eigen::MatrixXd* policy_matrix,
                         Eigen::MatrixXd* policy_matrix_inv) {
  const int m = static_cast<int>(h_basic.rows());
  const int p = static_cast<int>(b_basic.rows());
  const int b = static_cast<int>(h_basic.cols());
  if (b + 1 != m + p) {
    throw SingularError("policy matrix is not square; resource pooling fails");
  }
  Eigen::MatrixXd pi_mat = Eigen::MatrixXd::Zero(m + p, b + 1);
  pi_mat.block(0, 0, m, b) = h_basic;
  pi_mat(0, b) = 1.0;
  pi_mat.block(m, 0, p, b) = b_basic;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(pi_mat);
  if (!lu.isInvertible()) {
    throw SingularError("policy matrix is singular; upstream assumptions must have failed");
  }
  Eigen::MatrixXd inv = lu.inverse();
  const double residual =
      (pi_mat * inv - Eigen::MatrixXd::Identity(b + 1, b + 1)).cwiseAbs().maxCoeff();
  if (residual > kInverseTol) {
    throw SingularError("policy matrix inverse residual " + std::to_string(residual) +
                        " exceeds tolerance");
  }
  *policy_matrix = std::move(pi_mat);
  *policy_matrix_inv = std::move(inv);
}

PolicyConstants compute_constants(const Eigen::MatrixXd& policy_matrix_inv,
                                  const Eigen::VectorXd& rates,
                                  const std::vector<int>& basic,
                                  const Eigen::VectorXd& workload_weights,
                                  const NetworkSpec& net) {
  const int m = net.num_buffers;
  const int b = static_cast<int>(basic.size());

  PolicyConstants out;
  // c0 = min over basic activities and buffers of x*_j / |(Pi^{-1}[e_i;0])_j|,
  // skipping zero denominators. When every denominator vanishes (exactly the
  // single-buffer case), cap at 1: any finite positive value yields valid
  // safety stocks and 1 keeps them modest.
  bool any = false;
  double c0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd col = policy_matrix_inv.col(i);  // Pi^{-1} [e_i; 0]
    for (int jb = 0; jb < b; ++jb) {
      const double denom = std::abs(col(jb));
      if (denom <= 1e-12) continue;
      any = true;
      c0 = std::min(c0, rates(basic[jb]) / denom);
    }
  }
  out.c0 = any ? c0 : 1.0;

  const double y1 = workload_weights(0);
  out.c1 = out.c0 * (workload_weights / y1).maxCoeff();

  const double mu_max = net.service_rate.maxCoeff();
  const double level =
      net.num_activities * ((2.0 + out.c1 + out.c0) * std::max(1.0, mu_max) + 1.0);
  out.safety_stock_rate = Eigen::VectorXd::Constant(m, level);

  const double lambda_max = net.arrival_rate.maxCoeff();
  out.delta_bound =
      out.c0 / (2.0 * m * (1.0 + workload_weights.sum() * lambda_max));
  out.delta = 0.5 * out.delta_bound;
  return out;
}

std::vector<int> order_buffers(const NetworkSpec& net,
                               const Eigen::VectorXd& workload_weights) {
  std::vector<int> perm(net.num_buffers);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int bb) {
    return net.holding_cost(a) / workload_weights(a) <
           net.holding_cost(bb) / workload_weights(bb);
  });
  return perm;
}

namespace {

StaticPlan assemble_plan(const NetworkSpec& net, const std::vector<int>& perm) {
  StaticPlan plan;
  plan.net = net;
  plan.buffer_perm = perm;

  const StaticLpResult lp = solve_static_plan(plan.net);
  const AssumptionReport rep = verify_assumptions(lp, plan.net);
  if (!rep.all()) {
    throw StructuralError("assumptions fail, refusing policy construction: " + rep.detail);
  }
  plan.rates = lp.rates;
  plan.utilization = lp.utilization;
  plan.basic = lp.basic;

  const DualSolution dual = compute_duals(lp, plan.net);
  plan.workload_weights = dual.workload_weights;
  plan.server_weights = dual.server_weights;
  plan.nonbasic_margin = dual.nonbasic_margin;

  partition_columns(plan.net, plan.basic, &plan.nonbasic, &plan.h_basic,
                    &plan.j_nonbasic, &plan.b_basic, &plan.n_nonbasic);
  build_policy_matrix(plan.h_basic, plan.b_basic, &plan.policy_matrix,
                      &plan.policy_matrix_inv);

  const PolicyConstants consts = compute_constants(
      plan.policy_matrix_inv, plan.rates, plan.basic, plan.workload_weights, plan.net);
  plan.c0 = consts.c0;
  plan.c1 = consts.c1;
  plan.safety_stock_rate = consts.safety_stock_rate;
  plan.delta = consts.delta;
  plan.delta_bound = consts.delta_bound;
  plan.eps1_min = plan.net.min_eps1();
  return plan;
}

}  // namespace

StaticPlan make_static_plan(const NetworkSpec& net) {
  NetworkSpec working = net;
  validate_network_or_throw(working);

  const StaticLpResult lp = solve_static_plan(working);
  const AssumptionReport rep = verify_assumptions(lp, working);
  if (!rep.all()) {
    throw StructuralError("assumptions fail, refusing policy construction: " + rep.detail);
  }
  const DualSolution dual = compute_duals(lp, working);
  const std::vector<int> perm = order_buffers(working, dual.workload_weights);

  std::vector<int> identity(net.num_buffers);
  std::iota(identity.begin(), identity.end(), 0);
  if (perm == identity) {
    return assemble_plan(working, identity);
  }
  NetworkSpec permuted = permute_buffers(working, perm);
  return assemble_plan(permuted, perm);
}

}  // namespace crpnet
