#include "crpnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crpnet/streams.hpp"

namespace crpnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "dr") return PolicyKind::DiscreteReview;
  if (name == "priority") return PolicyKind::Priority;
  if (name == "longest-queue") return PolicyKind::LongestQueue;
  throw DomainError("unknown policy: " + name);
}

std::string policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::DiscreteReview: return "dr";
    case PolicyKind::Priority: return "priority";
    case PolicyKind::LongestQueue: return "longest-queue";
  }
  return "unknown";
}

double compute_workload(const Eigen::VectorXi& queue,
                        const Eigen::VectorXd& workload_weights) {
  return workload_weights.dot(queue.cast<double>());
}

double queue_bound_rate(const StaticPlan& plan) {
  const double theta_rate = plan.safety_stock_rate.maxCoeff();
  const double mu_max = plan.net.service_rate.maxCoeff();
  const double lambda_max = plan.net.arrival_rate.maxCoeff();
  const double y_theta = plan.workload_weights.dot(plan.safety_stock_rate);
  return 2.0 * theta_rate + plan.net.num_activities * (2.0 * mu_max + 1.0) +
         2.0 * lambda_max * (1.0 + y_theta);
}

double workload_threshold_rate(const StaticPlan& plan) {
  const double mu_max = plan.net.service_rate.maxCoeff();
  const double lambda_max = plan.net.arrival_rate.maxCoeff();
  const double y_max = plan.workload_weights.maxCoeff();
  const double y_theta = plan.workload_weights.dot(plan.safety_stock_rate);
  const int m = plan.net.num_buffers;
  const int n = plan.net.num_activities;
  return y_theta + m * n * y_max * (2.0 * mu_max + 1.0) +
         2.0 * y_max * m * y_theta * lambda_max;
}

namespace {

// Single-run event engine. One instance owns all mutable state for one
// trajectory; distinct replications use distinct instances and streams.
class Engine {
 public:
  Engine(const StaticPlan& plan, const PolicyParams& params, double horizon,
         std::uint64_t seed, std::uint64_t replication, PolicyKind kind)
      : plan_(plan),
        net_(plan.net),
        params_(params),
        kind_(kind),
        horizon_(horizon),
        streams_(plan.net, seed, replication) {
    traj_.policy = kind;
    traj_.horizon = horizon;
    traj_.seed = seed;
    traj_.replication = replication;
  }

  Trajectory run() {
    init_state();
    if (kind_ == PolicyKind::DiscreteReview) {
      start_period();
    } else {
      dispatch_baseline();
    }
    batch_tag_ = EventTag::Init;
    batch_entity_ = -1;
    record_sample();

    for (;;) {
      const double t = next_event_time();
      batch_tag_ = EventTag::Review;
      batch_entity_ = -1;
      if (kind_ != PolicyKind::DiscreteReview && t > horizon_) {
        advance_to(horizon_);
        batch_tag_ = EventTag::Final;
        record_sample();
        break;
      }
      advance_to(t);
      process_arrivals(t);
      process_completions(t);
      bool stopped = false;
      if (kind_ == PolicyKind::DiscreteReview) {
        stopped = process_boundaries(t);
      } else {
        dispatch_baseline();
      }
      record_sample();
      if (stopped) break;
    }
    traj_.period_detail = kind_ == PolicyKind::DiscreteReview;
    return std::move(traj_);
  }

 private:
  struct Window {
    int activity = -1;
    double start = 0.0;
    double end = 0.0;
  };

  struct ServerSched {
    std::vector<Window> windows;
    std::size_t pos = 0;
    bool open = false;       // inside the current window
    bool abandoned = false;  // current window stalled (cap or starvation)
  };

  void init_state() {
    const int m = net_.num_buffers;
    const int n = net_.num_activities;
    const int p = net_.num_servers;

    queue_.resize(m);
    for (int i = 0; i < m; ++i) {
      queue_(i) = static_cast<int>(std::llround(params_.safety_stock(i)));
    }
    traj_.initial_queue = queue_;

    in_service_.assign(m, 0);
    parked_.assign(m, 0);
    completion_time_.assign(n, kInf);
    residual_.assign(n, 0.0);
    busy_.assign(n, 0.0);
    completions_.assign(n, 0);
    period_base_completions_.assign(n, 0);
    arrivals_.assign(m, 0);
    routing_counts_.assign(n, std::vector<long long>(m, 0));
    next_arrival_.assign(m, kInf);
    for (int k : net_.arriving_buffers()) {
      next_arrival_[k] = streams_.draw_interarrival(k);
    }
    server_activities_.assign(p, {});
    for (int j = 0; j < n; ++j) {
      server_activities_[net_.activity_server[j]].push_back(j);
    }
    sched_.assign(p, {});
    serving_.assign(p, -1);
  }

  // --- time bookkeeping -------------------------------------------------

  double next_event_time() const {
    double t = kInf;
    for (double a : next_arrival_) t = std::min(t, a);
    for (double c : completion_time_) t = std::min(t, c);
    if (kind_ == PolicyKind::DiscreteReview) {
      for (int k = 0; k < net_.num_servers; ++k) t = std::min(t, next_boundary(k));
      t = std::min(t, period_end_);
    }
    if (t == kInf) {
      throw Error("event calendar is empty");
    }
    return t;
  }

  double next_boundary(int server) const {
    const ServerSched& s = sched_[server];
    if (s.pos >= s.windows.size()) return period_end_;
    return s.open ? s.windows[s.pos].end : s.windows[s.pos].start;
  }

  void advance_to(double t) {
    const double dt = t - clock_;
    if (dt < 0.0) throw Error("clock moved backwards");
    if (dt > 0.0) {
      for (int j = 0; j < net_.num_activities; ++j) {
        if (completion_time_[j] < kInf) busy_[j] += dt;
      }
      cum_cost_ += net_.holding_cost.dot(queue_.cast<double>()) * dt;
      double idle_weight = 0.0;
      for (int k = 0; k < net_.num_servers; ++k) {
        if (serving_[k] < 0) idle_weight += plan_.server_weights(k);
      }
      if (idle_weight > 0.0 && kind_ == PolicyKind::DiscreteReview &&
          !traj_.periods.empty() && current_period_open_) {
        traj_.periods.back().idle_increments.push_back(
            {compute_workload(queue_, plan_.workload_weights), idle_weight * dt});
      }
      clock_ = t;
    }
  }

  // --- events -----------------------------------------------------------

  void process_arrivals(double t) {
    for (int k = 0; k < net_.num_buffers; ++k) {
      while (next_arrival_[k] == t) {
        if (batch_tag_ == EventTag::Review) {
          batch_tag_ = EventTag::Arrival;
          batch_entity_ = k;
        }
        queue_(k) += 1;
        arrivals_[k] += 1;
        next_arrival_[k] = t + streams_.draw_interarrival(k);
        note_queue_change();
      }
    }
  }

  void process_completions(double t) {
    for (int j = 0; j < net_.num_activities; ++j) {
      if (completion_time_[j] != t) continue;
      if (batch_tag_ == EventTag::Review) {
        batch_tag_ = EventTag::Completion;
        batch_entity_ = j;
      }
      const int buf = net_.activity_buffer[j];
      if (queue_(buf) <= 0) throw Error("completion from an empty buffer");
      queue_(buf) -= 1;
      in_service_[buf] -= 1;
      completions_[j] += 1;
      completion_time_[j] = kInf;
      serving_[net_.activity_server[j]] = -1;
      const int dest = streams_.draw_route(j);
      if (dest > 0) {
        queue_(dest - 1) += 1;
        routing_counts_[j][dest - 1] += 1;
      }
      note_queue_change();
      check_ledger();
      if (kind_ == PolicyKind::DiscreteReview) {
        continue_window(j);
      }
    }
  }

  void note_queue_change() {
    if (queue_.minCoeff() < 0) throw Error("queue went negative");
    if (kind_ == PolicyKind::DiscreteReview && !traj_.periods.empty() &&
        current_period_open_) {
      PeriodRecord& pr = traj_.periods.back();
      pr.peak_queue = pr.peak_queue.cwiseMax(queue_);
    }
  }

  void check_ledger() const {
    // Integer flow identity: Z = Z(0) + E + routed-in - completed-out.
    for (int i = 0; i < net_.num_buffers; ++i) {
      long long expect = traj_.initial_queue(i) + arrivals_[i];
      for (int j = 0; j < net_.num_activities; ++j) {
        expect += routing_counts_[j][i];
        if (net_.activity_buffer[j] == i) expect -= completions_[j];
      }
      if (expect != queue_(i)) {
        throw Error("job-count ledger violated at buffer " + std::to_string(i));
      }
    }
  }

  // --- service starts ---------------------------------------------------

  int fresh_available(int buf) const {
    return queue_(buf) - in_service_[buf] - parked_[buf];
  }

  void start_service(int j) {
    const int buf = net_.activity_buffer[j];
    double remaining;
    if (residual_[j] > 0.0) {
      remaining = residual_[j];
      residual_[j] = 0.0;
      parked_[buf] -= 1;
    } else {
      remaining = streams_.draw_service(j);
    }
    in_service_[buf] += 1;
    completion_time_[j] = clock_ + remaining;
    serving_[net_.activity_server[j]] = j;
  }

  void preempt(int j) {
    if (completion_time_[j] == kInf) return;
    const int buf = net_.activity_buffer[j];
    residual_[j] = completion_time_[j] - clock_;
    completion_time_[j] = kInf;
    in_service_[buf] -= 1;
    parked_[buf] += 1;
    serving_[net_.activity_server[j]] = -1;
  }

  // --- discrete review mechanics ----------------------------------------

  void start_period() {
    PeriodRecord pr;
    pr.index = static_cast<int>(traj_.periods.size());
    pr.start = clock_;
    pr.queue_start = queue_;
    pr.peak_queue = queue_;
    pr.plan = make_plan(queue_.cast<double>(), params_, plan_);
    period_end_ = clock_ + pr.plan.exec_time;
    pr.end = period_end_;
    period_base_completions_ = completions_;

    const double work_start = clock_ + pr.plan.idle_time;
    for (int k = 0; k < net_.num_servers; ++k) {
      ServerSched& s = sched_[k];
      s.windows.clear();
      s.pos = 0;
      s.open = false;
      s.abandoned = false;
      double cursor = work_start;
      for (int j : server_activities_[k]) {
        const double d = pr.plan.activity_time(j);
        if (d <= 0.0) continue;
        Window w;
        w.activity = j;
        w.start = cursor;
        w.end = std::min(cursor + d, period_end_);
        cursor += d;
        if (w.end > w.start) s.windows.push_back(w);
      }
    }
    traj_.periods.push_back(std::move(pr));
    current_period_open_ = true;
    // A zero-length first window can start immediately.
    open_due_windows(clock_);
  }

  void finish_period() {
    PeriodRecord& pr = traj_.periods.back();
    pr.end = clock_;
    pr.queue_end = queue_;
    pr.residual_arrival_end.resize(net_.num_buffers);
    for (int k = 0; k < net_.num_buffers; ++k) {
      pr.residual_arrival_end(k) =
          next_arrival_[k] == kInf ? 0.0 : next_arrival_[k] - clock_;
    }
    pr.residual_service_end =
        Eigen::Map<const Eigen::VectorXd>(residual_.data(), residual_.size());
    pr.completions_delta.resize(net_.num_activities);
    for (int j = 0; j < net_.num_activities; ++j) {
      pr.completions_delta(j) =
          static_cast<int>(completions_[j] - period_base_completions_[j]);
    }
    current_period_open_ = false;
  }

  bool cap_reached(int j) const {
    const ReviewPlan& rp = traj_.periods.back().plan;
    return completions_[j] - period_base_completions_[j] >= rp.job_cap(j);
  }

  void try_start_window(int server) {
    ServerSched& s = sched_[server];
    if (s.pos >= s.windows.size() || !s.open || s.abandoned) return;
    if (clock_ >= s.windows[s.pos].end) return;  // closes in this batch
    const int j = s.windows[s.pos].activity;
    if (completion_time_[j] < kInf) return;
    if (cap_reached(j) ||
        (residual_[j] <= 0.0 && fresh_available(net_.activity_buffer[j]) < 1)) {
      // Idle for the remaining time dedicated to this activity.
      s.abandoned = true;
      return;
    }
    start_service(j);
  }

  void continue_window(int j) {
    try_start_window(net_.activity_server[j]);
  }

  void open_due_windows(double t) {
    for (int k = 0; k < net_.num_servers; ++k) {
      ServerSched& s = sched_[k];
      while (s.pos < s.windows.size()) {
        Window& w = s.windows[s.pos];
        if (!s.open && w.start <= t) {
          s.open = true;
          s.abandoned = false;
          try_start_window(k);
        }
        if (s.open && w.end <= t) {
          preempt(w.activity);
          s.pos += 1;
          s.open = false;
          s.abandoned = false;
          continue;
        }
        break;
      }
    }
  }

  // Returns true when the run is finished.
  bool process_boundaries(double t) {
    open_due_windows(t);
    if (period_end_ == t) {
      for (int k = 0; k < net_.num_servers; ++k) {
        ServerSched& s = sched_[k];
        if (s.pos < s.windows.size() && s.open) {
          preempt(s.windows[s.pos].activity);
        }
        s.pos = s.windows.size();
        s.open = false;
      }
      finish_period();
      if (clock_ >= horizon_) return true;
      start_period();
    }
    return false;
  }

  // --- baselines ----------------------------------------------------------

  bool has_work(int j) const {
    return residual_[j] > 0.0 || fresh_available(net_.activity_buffer[j]) >= 1;
  }

  // Lower is better. Priority: cheapest buffer first. Longest queue:
  // negated length so the longest wins.
  double discipline_score(int j) const {
    const int buf = net_.activity_buffer[j];
    return kind_ == PolicyKind::Priority ? static_cast<double>(buf)
                                         : -static_cast<double>(queue_(buf));
  }

  void dispatch_baseline() {
    for (int k = 0; k < net_.num_servers; ++k) {
      int best = -1;
      for (int j : server_activities_[k]) {
        if (serving_[k] != j && !has_work(j)) continue;
        if (best < 0 || discipline_score(j) < discipline_score(best)) best = j;
      }
      if (best < 0 || serving_[k] == best) continue;
      if (serving_[k] >= 0) {
        // Switch only for a strictly better buffer.
        if (discipline_score(best) < discipline_score(serving_[k])) {
          preempt(serving_[k]);
          start_service(best);
        }
      } else {
        start_service(best);
      }
    }
  }

  // --- sampling -----------------------------------------------------------

  void record_sample() {
    EventSample s;
    s.t = clock_;
    s.tag = batch_tag_;
    s.entity = batch_entity_;
    s.queue = queue_;
    s.workload = compute_workload(queue_, plan_.workload_weights);
    s.busy = Eigen::Map<const Eigen::VectorXd>(busy_.data(), busy_.size());
    s.idle.resize(net_.num_servers);
    for (int k = 0; k < net_.num_servers; ++k) {
      double b = 0.0;
      for (int j : server_activities_[k]) b += busy_[j];
      s.idle(k) = clock_ - b;
    }
    s.arrivals.resize(net_.num_buffers);
    for (int i = 0; i < net_.num_buffers; ++i) {
      s.arrivals(i) = static_cast<int>(arrivals_[i]);
    }
    s.completions.resize(net_.num_activities);
    for (int j = 0; j < net_.num_activities; ++j) {
      s.completions(j) = static_cast<int>(completions_[j]);
    }
    s.routing_centered = Eigen::VectorXd::Zero(net_.num_buffers);
    for (int j = 0; j < net_.num_activities; ++j) {
      for (int i = 0; i < net_.num_buffers; ++i) {
        s.routing_centered(i) +=
            routing_counts_[j][i] - net_.routing(j, i) * completions_[j];
      }
    }
    s.serving_mask = 0;
    for (int j = 0; j < net_.num_activities; ++j) {
      if (completion_time_[j] < kInf) s.serving_mask |= (1ULL << j);
    }
    s.cum_cost = cum_cost_;
    traj_.samples.push_back(std::move(s));
  }

  const StaticPlan& plan_;
  const NetworkSpec& net_;
  PolicyParams params_;
  PolicyKind kind_;
  double horizon_;
  PrimitiveStreams streams_;
  Trajectory traj_;

  double clock_ = 0.0;
  double cum_cost_ = 0.0;
  Eigen::VectorXi queue_;
  std::vector<int> in_service_;
  std::vector<int> parked_;
  std::vector<double> completion_time_;
  std::vector<double> residual_;
  std::vector<double> busy_;
  std::vector<long long> completions_;
  std::vector<long long> period_base_completions_;
  std::vector<long long> arrivals_;
  std::vector<std::vector<long long>> routing_counts_;
  std::vector<double> next_arrival_;
  std::vector<std::vector<int>> server_activities_;
  std::vector<ServerSched> sched_;
  std::vector<int> serving_;  // activity in service per server, -1 if idle
  double period_end_ = kInf;
  bool current_period_open_ = false;
  EventTag batch_tag_ = EventTag::Init;
  int batch_entity_ = -1;
};

}  // namespace

Trajectory run_dr_trajectory(const StaticPlan& plan, const PolicyParams& params,
                             double horizon, std::uint64_t seed,
                             std::uint64_t replication) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  Engine engine(plan, params, horizon, seed, replication, PolicyKind::DiscreteReview);
  return engine.run();
}

Trajectory run_baseline_trajectory(const StaticPlan& plan, const PolicyParams& params,
                                   double horizon, std::uint64_t seed, PolicyKind kind,
                                   std::uint64_t replication) {
  if (kind == PolicyKind::DiscreteReview) {
    return run_dr_trajectory(plan, params, horizon, seed, replication);
  }
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  Engine engine(plan, params, horizon, seed, replication, kind);
  return engine.run();
}

CostSummary accumulate_cost(const Trajectory& traj, const Eigen::VectorXd& holding_cost,
                            double gamma) {
  CostSummary out;
  double plain = 0.0;
  double discounted = 0.0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double t0 = std::min(traj.samples[i].t, traj.horizon);
    const double t1 = i + 1 < traj.samples.size()
                          ? std::min(traj.samples[i + 1].t, traj.horizon)
                          : traj.horizon;
    if (t1 <= t0) continue;
    const double rate = holding_cost.dot(traj.samples[i].queue.cast<double>());
    plain += rate * (t1 - t0);
    if (gamma == 0.0) {
      discounted += rate * (t1 - t0);
    } else {
      discounted += rate * (std::exp(-gamma * t0) - std::exp(-gamma * t1)) / gamma;
    }
  }
  out.discounted = discounted;
  out.average = plain / traj.horizon;
  return out;
}

std::vector<PeriodDiagnostics> monitor_good_events(const Trajectory& traj,
                                                   const PolicyParams& params,
                                                   const StaticPlan& plan) {
  if (!traj.period_detail) {
    throw MissingDetailError("trajectory lacks per-period residual records");
  }
  const double l = params.period_length;
  const double radius = params.delta * l;
  const double residual_bound = params.delta * std::sqrt(l);
  const double b_bound = queue_bound_rate(plan) * l;
  const double w_threshold = workload_threshold_rate(plan) * l;
  const std::vector<int> arriving = plan.net.arriving_buffers();

  std::vector<PeriodDiagnostics> out;
  out.reserve(traj.periods.size());
  for (const PeriodRecord& pr : traj.periods) {
    PeriodDiagnostics d;
    d.index = pr.index;
    d.queue_bound = b_bound;
    d.workload_threshold = w_threshold;

    const bool start_in = in_target_ball(pr.queue_start.cast<double>(),
                                         params.safety_stock, radius);
    const bool end_in = in_target_ball(pr.queue_end.cast<double>(),
                                       params.safety_stock, radius);
    d.ball_both_ends = start_in && end_in;

    d.queues_bounded = true;
    for (int i = 1; i < plan.net.num_buffers; ++i) {
      if (pr.peak_queue(i) > b_bound) d.queues_bounded = false;
    }

    d.completions_runaway = false;
    if (start_in) {
      for (int j = 0; j < plan.net.num_activities; ++j) {
        if (pr.completions_delta(j) >= (2.0 * plan.net.service_rate(j) + 1.0) * l) {
          d.completions_runaway = true;
        }
      }
    }

    d.residuals_small = true;
    for (int k : arriving) {
      if (pr.residual_arrival_end(k) > residual_bound) d.residuals_small = false;
    }
    for (int j = 0; j < plan.net.num_activities; ++j) {
      if (pr.residual_service_end(j) > residual_bound) d.residuals_small = false;
    }

    double bad_idle = 0.0;
    for (const IdleIncrement& inc : pr.idle_increments) {
      if (inc.workload > w_threshold) bad_idle += inc.amount;
    }
    d.no_idle_above = bad_idle == 0.0;

    d.all_good = d.ball_both_ends && d.queues_bounded && !d.completions_runaway &&
                 d.residuals_small && d.no_idle_above;
    out.push_back(d);
  }
  return out;
}

}  // namespace crpnet
