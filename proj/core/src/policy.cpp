#include "crpnet/policy.hpp"

#include <cmath>

namespace crpnet {

PolicyParams scale_parameters(double r, double eps2, const StaticPlan& plan) {
  if (!(eps2 > 0.0) || !(eps2 < plan.eps1_min / 3.0)) {
    throw Eps2RangeError("eps2 must satisfy 0 < eps2 < eps1/3 = " +
                         std::to_string(plan.eps1_min / 3.0));
  }
  if (!(r > 0.0)) {
    throw DomainError("scale index must be positive");
  }
  return params_for_length(std::pow(r, 1.0 - eps2), plan);
}

PolicyParams params_for_length(double l, const StaticPlan& plan) {
  if (!(l > 0.0)) {
    throw DomainError("period length must be positive");
  }
  PolicyParams params;
  params.period_length = l;
  params.safety_stock = plan.safety_stock_rate * l;
  params.delta = plan.delta;
  params.job_cap_divisor = plan.net.num_activities;
  return params;
}

bool in_target_ball(const Eigen::VectorXd& q, const Eigen::VectorXd& center,
                    double radius) {
  if (!(q(0) > center(0) - radius)) return false;
  for (int i = 1; i < q.size(); ++i) {
    if (!(std::abs(q(i) - center(i)) < radius)) return false;
  }
  return true;
}

int classify_state(const Eigen::VectorXd& q, const PolicyParams& params) {
  const double radius = params.delta * params.period_length;
  return in_target_ball(q, params.safety_stock, radius) ? 1 : 2;
}

namespace {

Eigen::VectorXi job_caps(const Eigen::VectorXd& q, const StaticPlan& plan,
                         int divisor) {
  Eigen::VectorXi caps = Eigen::VectorXi::Zero(plan.net.num_activities);
  for (int j : plan.basic) {
    caps(j) = static_cast<int>(std::floor(q(plan.net.activity_buffer[j]) / divisor));
  }
  return caps;
}

void check_feasible(const ReviewPlan& rp, const StaticPlan& plan) {
  Eigen::VectorXd per_server = Eigen::VectorXd::Zero(plan.net.num_servers);
  for (int j = 0; j < plan.net.num_activities; ++j) {
    if (rp.activity_time(j) < 0.0) {
      throw Error("planned activity duration is negative");
    }
    per_server(plan.net.activity_server[j]) += rp.activity_time(j);
  }
  if ((per_server.array() > rp.exec_time - rp.idle_time + 1e-9).any()) {
    throw Error("planned durations exceed the working window");
  }
}

}  // namespace

ReviewPlan plan_case1(const Eigen::VectorXd& q, const PolicyParams& params,
                      const StaticPlan& plan) {
  const double l = params.period_length;
  const Eigen::VectorXd& theta = params.safety_stock;
  if (!in_target_ball(q, theta, params.delta * l)) {
    throw OutOfBallError("state is outside the target ball");
  }
  const int m = plan.net.num_buffers;
  const int p = plan.net.num_servers;
  const int b = plan.num_basic();
  const Eigen::VectorXd& y = plan.workload_weights;

  ReviewPlan rp;
  rp.case_tag = 1;
  rp.stretch = 1.0;
  rp.idle_time = std::max(0.0, y.dot(theta - q));
  rp.exec_time = l + rp.idle_time;

  Eigen::VectorXd rhs(m + p);
  rhs.head(m) = q + plan.net.arrival_rate * rp.exec_time - theta;
  rhs.tail(p) = Eigen::VectorXd::Constant(p, l);
  const Eigen::VectorXd v = plan.policy_matrix_inv * rhs;

  rp.activity_time = Eigen::VectorXd::Zero(plan.net.num_activities);
  for (int i = 0; i < b; ++i) rp.activity_time(plan.basic[i]) = v(i);

  // Workload surplus parks in the cheapest buffer; the deficit case is
  // absorbed by the initial idle time.
  rp.target = theta;
  rp.target(0) += std::max(0.0, y.dot(q - theta)) / y(0);

  rp.job_cap = job_caps(q, plan, params.job_cap_divisor);
  check_feasible(rp, plan);
  return rp;
}

ReviewPlan plan_case2(const Eigen::VectorXd& q, const PolicyParams& params,
                      const StaticPlan& plan) {
  const double l = params.period_length;
  const Eigen::VectorXd& theta = params.safety_stock;
  const int m = plan.net.num_buffers;
  const int p = plan.net.num_servers;
  const int b = plan.num_basic();
  const Eigen::VectorXd& y = plan.workload_weights;

  ReviewPlan rp;
  rp.case_tag = 2;
  rp.idle_time = std::max(0.0, y.dot(theta - q));
  const Eigen::VectorXd q_tilde = q + plan.net.arrival_rate * rp.idle_time;

  Eigen::VectorXd gap(m + p);
  gap.head(m) = theta - q_tilde;
  gap.tail(p).setZero();
  const Eigen::VectorXd w = plan.policy_matrix_inv * gap;
  double stretch = 1.0;
  for (int i = 0; i < b; ++i) {
    stretch = std::max(stretch, std::abs(w(i)) / (l * plan.rates(plan.basic[i])));
  }
  rp.stretch = stretch;
  rp.exec_time = rp.idle_time + stretch * l;

  rp.target = theta;
  rp.target(0) += y.dot(q_tilde - theta) / y(0);

  Eigen::VectorXd rhs(m + p);
  rhs.head(m) = q_tilde + plan.net.arrival_rate * l - theta;
  rhs.tail(p) = Eigen::VectorXd::Constant(p, l);
  const Eigen::VectorXd u = plan.policy_matrix_inv * rhs;

  rp.activity_time = Eigen::VectorXd::Zero(plan.net.num_activities);
  for (int i = 0; i < b; ++i) {
    const double rate =
        plan.rates(plan.basic[i]) * (1.0 - 1.0 / stretch) + u(i) / (stretch * l);
    double duration = stretch * rate * l;
    if (duration < 0.0) {
      if (duration < -1e-9) {
        throw Error("stretched plan produced a negative duration");
      }
      duration = 0.0;
    }
    rp.activity_time(plan.basic[i]) = duration;
  }

  rp.job_cap = job_caps(q_tilde, plan, params.job_cap_divisor);
  check_feasible(rp, plan);
  return rp;
}

ReviewPlan make_plan(const Eigen::VectorXd& q, const PolicyParams& params,
                     const StaticPlan& plan) {
  return classify_state(q, params) == 1 ? plan_case1(q, params, plan)
                                        : plan_case2(q, params, plan);
}

}  // namespace crpnet
