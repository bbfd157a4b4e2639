#pragma once

#include <Eigen/Dense>

#include "crpnet/static_plan.hpp"

namespace crpnet {

// Review-policy parameters for one system scale.
struct PolicyParams {
  double period_length = 0.0;   // nominal period length l
  Eigen::VectorXd safety_stock;  // theta = safety_stock_rate * l
  double delta = 0.0;            // ball-radius coefficient
  int job_cap_divisor = 0;       // = n; an activity may serve at most
                                 // floor(q_b / n) jobs per period
};

// l = r^(1-eps2), safety stock scaled along. Requires 0 < eps2 < eps1/3
// for the most restrictive declared eps1; throws Eps2RangeError otherwise.
PolicyParams scale_parameters(double r, double eps2, const StaticPlan& plan);

// Parameters for an explicitly chosen period length.
PolicyParams params_for_length(double l, const StaticPlan& plan);

// Membership in the target ball around `center` of radius a: the first
// coordinate is one-sided (q_1 > center_1 - a), the rest two-sided
// (|q_i - center_i| < a).
bool in_target_ball(const Eigen::VectorXd& q, const Eigen::VectorXd& center, double radius);

// One review period's open-loop schedule.
struct ReviewPlan {
  int case_tag = 0;         // 1: near target, 2: stretched correction
  double idle_time = 0.0;   // all servers idle this long first
  double exec_time = 0.0;   // total period length
  double stretch = 1.0;     // period-length multiplier (1 in case 1)
  Eigen::VectorXd activity_time;  // per-activity planned duration, size n
  Eigen::VectorXd target;         // intended end state z, size m
  Eigen::VectorXi job_cap;        // per-activity max completions, size n
};

// 1 when q lies in the delta*l ball around the safety stock, else 2.
int classify_state(const Eigen::VectorXd& q, const PolicyParams& params);

// Near-target plan: servers idle for [y'(theta-q)]^+, then run the rates
// solved from the policy matrix for l time units. Throws OutOfBallError
// when q is outside the ball.
ReviewPlan plan_case1(const Eigen::VectorXd& q, const PolicyParams& params,
                      const StaticPlan& plan);

// Far-from-target plan: idle to accumulate work if needed, then stretch the
// period so a small perturbation of the nominal rates reaches the target.
ReviewPlan plan_case2(const Eigen::VectorXd& q, const PolicyParams& params,
                      const StaticPlan& plan);

ReviewPlan make_plan(const Eigen::VectorXd& q, const PolicyParams& params,
                     const StaticPlan& plan);

}  // namespace crpnet
