#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "crpnet/policy.hpp"
#include "crpnet/static_plan.hpp"

namespace crpnet {

enum class PolicyKind { DiscreteReview, Priority, LongestQueue };

PolicyKind policy_kind_from_name(const std::string& name);
std::string policy_kind_name(PolicyKind kind);

enum class EventTag : int { Init = 0, Arrival, Completion, Review, Final };

// State snapshot written after every event batch. Between samples the queue
// vector is constant and the busy times grow linearly along serving_mask,
// so any intermediate time can be reconstructed exactly.
struct EventSample {
  double t = 0.0;
  EventTag tag = EventTag::Init;  // first thing that happened in the batch
  int entity = -1;                // buffer (arrival) or activity (completion)
  Eigen::VectorXi queue;             // Z, size m
  double workload = 0.0;             // y'Z
  Eigen::VectorXd busy;              // cumulative per-activity busy time T, size n
  Eigen::VectorXd idle;              // cumulative per-server idleness I, size p
  Eigen::VectorXi arrivals;          // cumulative external arrivals E, size m
  Eigen::VectorXi completions;       // per-activity completed jobs, size n
  Eigen::VectorXd routing_centered;  // sum_j (routed counts - P_j' * completions_j), size m
  std::uint64_t serving_mask = 0;    // bit j set while activity j serves on [t, next)
  double cum_cost = 0.0;             // integral of h'Z up to t
};

// One idleness increase inside a period, with the workload level it
// happened at. The workload is constant while idleness accrues, so the
// no-idling-above-threshold integral reduces to a finite sum over these.
struct IdleIncrement {
  double workload = 0.0;
  double amount = 0.0;  // weighted idleness pi'dI
};

struct PeriodRecord {
  int index = 0;
  double start = 0.0;
  double end = 0.0;
  ReviewPlan plan;
  Eigen::VectorXi queue_start;
  Eigen::VectorXi queue_end;
  Eigen::VectorXd residual_arrival_end;  // time to next arrival per buffer at period end
  Eigen::VectorXd residual_service_end;  // preempted leftover per activity at period end
  Eigen::VectorXi completions_delta;
  Eigen::VectorXi peak_queue;  // per-buffer running max over the period
  std::vector<IdleIncrement> idle_increments;
};

struct Trajectory {
  PolicyKind policy = PolicyKind::DiscreteReview;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  Eigen::VectorXi initial_queue;
  std::vector<EventSample> samples;
  std::vector<PeriodRecord> periods;  // complete periods only; empty for baselines
  bool period_detail = false;
};

// Runs the discrete review policy from Z(0) = round(safety stock) with
// fresh arrival clocks and no partially completed jobs. Periods execute
// open loop: all servers idle for the plan's idle time, then each server
// runs its planned activities sequentially in ascending activity index and
// idles any remaining time. Service is head-of-line preemptive-resume; an
// activity that hits its job cap or runs out of jobs idles for the rest of
// the time dedicated to it. Simulation continues through the first period
// ending at or after `horizon`.
Trajectory run_dr_trajectory(const StaticPlan& plan, const PolicyParams& params,
                             double horizon, std::uint64_t seed,
                             std::uint64_t replication = 0);

// Work-conserving baselines from the same initial condition. `Priority`
// serves the lowest-index buffer available to the server (buffers are
// already ordered by holding cost per unit workload); `LongestQueue` serves
// the longest eligible buffer. Both preemptive-resume, never idling a
// server that has an eligible nonempty buffer.
Trajectory run_baseline_trajectory(const StaticPlan& plan, const PolicyParams& params,
                                   double horizon, std::uint64_t seed, PolicyKind kind,
                                   std::uint64_t replication = 0);

double compute_workload(const Eigen::VectorXi& queue, const Eigen::VectorXd& workload_weights);

struct CostSummary {
  double discounted = 0.0;  // integral of e^{-gamma s} h'Z(s) ds over [0, horizon]
  double average = 0.0;     // (1/horizon) * integral of h'Z
};

CostSummary accumulate_cost(const Trajectory& traj, const Eigen::VectorXd& holding_cost,
                            double gamma);

// Per-period regularity flags. `all_good` requires: ball membership at both
// review points, bounded non-cheapest queues, no run-away activity
// completions, small end-of-period residuals, and no idleness while the
// workload sits above its threshold.
struct PeriodDiagnostics {
  int index = 0;
  bool ball_both_ends = false;       // A
  bool queues_bounded = false;       // B
  bool completions_runaway = false;  // C (bad when true)
  bool residuals_small = false;      // D
  bool no_idle_above = false;        // E
  bool all_good = false;             // A and B and not C and D and E
  double queue_bound = 0.0;
  double workload_threshold = 0.0;
};

// Throws MissingDetailError when the trajectory lacks per-period records
// (baseline trajectories, or runs recorded without detail).
std::vector<PeriodDiagnostics> monitor_good_events(const Trajectory& traj,
                                                   const PolicyParams& params,
                                                   const StaticPlan& plan);

// Bound on the non-cheapest queues during a good period, per unit l.
double queue_bound_rate(const StaticPlan& plan);
// Workload level above which good periods accrue no idleness, per unit l.
double workload_threshold_rate(const StaticPlan& plan);

}  // namespace crpnet
