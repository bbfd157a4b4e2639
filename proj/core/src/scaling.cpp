#include "crpnet/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace crpnet {

namespace {

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace

ScaledPath diffusion_scale(const Trajectory& traj, const StaticPlan& plan, double r,
                           double T, GridMode mode, int uniform_points) {
  if (!(r > 0.0) || !(T > 0.0)) throw DomainError("scale and window must be positive");
  if (traj.samples.empty()) throw HorizonError("trajectory has no samples");
  const double raw_T = r * r * T;
  if (traj.samples.back().t + 1e-9 < raw_T) {
    throw HorizonError("trajectory horizon shorter than r^2 * T");
  }

  const NetworkSpec& net = plan.net;
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int n = net.num_activities;

  std::vector<double> grid;
  if (mode == GridMode::Events) {
    grid.push_back(0.0);
    for (const EventSample& s : traj.samples) {
      if (s.t > 0.0 && s.t <= raw_T) grid.push_back(s.t / (r * r));
    }
    if (grid.back() < T) grid.push_back(T);
  } else {
    std::set<double> pts;
    for (int i = 0; i < uniform_points; ++i) {
      pts.insert(T * i / (uniform_points - 1.0));
    }
    for (const PeriodRecord& pr : traj.periods) {
      const double img = pr.start / (r * r);
      if (img <= T) pts.insert(img);
    }
    grid.assign(pts.begin(), pts.end());
  }

  const int g = static_cast<int>(grid.size());
  ScaledPath out;
  out.r = r;
  out.T = T;
  out.t = grid;
  out.queue.resize(g, m);
  out.workload.resize(g);
  out.idle.resize(g, p);
  out.idle_workload.resize(g);
  out.netflow_workload.resize(g);
  out.fluid_busy.resize(g, n);
  out.fluid_completions.resize(g, n);

  std::vector<double> times(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) times[i] = traj.samples[i].t;

  const Eigen::VectorXd z0 = traj.initial_queue.cast<double>();
  const Eigen::MatrixXd rm = net.io_matrix * net.mean_service.asDiagonal();

  for (int gi = 0; gi < g; ++gi) {
    const double tau = grid[gi] * r * r;
    auto it = std::upper_bound(times.begin(), times.end(), tau);
    const std::size_t idx = (it == times.begin()) ? 0 : (it - times.begin() - 1);
    const EventSample& s = traj.samples[idx];
    const double dt = std::max(0.0, tau - s.t);

    Eigen::VectorXd busy(n);
    for (int j = 0; j < n; ++j) {
      busy(j) = s.busy(j) + ((s.serving_mask >> j) & 1ULL ? dt : 0.0);
    }
    Eigen::VectorXd idle = Eigen::VectorXd::Constant(p, tau);
    for (int j = 0; j < n; ++j) idle(net.activity_server[j]) -= busy(j);

    const Eigen::VectorXd z = s.queue.cast<double>();
    out.queue.row(gi) = (z / r).transpose();
    out.workload(gi) = s.workload / r;
    out.idle.row(gi) = (idle / r).transpose();
    out.idle_workload(gi) = plan.server_weights.dot(idle) / r;

    const Eigen::VectorXd arrivals_centered =
        s.arrivals.cast<double>() - net.arrival_rate * tau;
    const Eigen::VectorXd completions_centered =
        s.completions.cast<double>() - net.service_rate.cwiseProduct(busy);
    const Eigen::VectorXd netflow =
        z0 + arrivals_centered + s.routing_centered - rm * completions_centered;
    out.netflow_workload(gi) = plan.workload_weights.dot(netflow) / r;

    out.fluid_busy.row(gi) = (busy / (r * r)).transpose();
    out.fluid_completions.row(gi) = (s.completions.cast<double>() / (r * r)).transpose();
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> regulator_map(
    const std::vector<double>& x) {
  std::vector<double> psi(x.size()), phi(x.size());
  double running = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    running = std::max(running, -x[i]);
    psi[i] = running;
    phi[i] = x[i] + running;
  }
  return {psi, phi};
}

bool sandwich_check(const std::vector<double>& w, const std::vector<double>& x,
                    const std::vector<double>& y, double delta, double tol) {
  std::ostringstream bad;
  if (w.size() != x.size() || w.size() != y.size() || w.empty()) {
    throw PreconditionError("paths must be nonempty and equally sized");
  }
  bool i_ok = true, ii_ok = true, iii_ok = true;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (std::abs(w[k] - (x[k] + y[k])) > tol) i_ok = false;
    if (w[k] < -tol) ii_ok = false;
  }
  if (std::abs(y[0]) > tol) iii_ok = false;
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    if (y[k + 1] < y[k] - tol) iii_ok = false;
    if (y[k + 1] > y[k] + tol && w[k] > delta + tol) iii_ok = false;
  }
  if (!i_ok || !ii_ok || !iii_ok) {
    bad << "violated:";
    if (!i_ok) bad << " (i) w = x + y";
    if (!ii_ok) bad << " (ii) w >= 0";
    if (!iii_ok) bad << " (iii) y nondecreasing from 0, increasing only while w <= delta";
    throw PreconditionError(bad.str());
  }

  const auto [psi, phi] = regulator_map(x);
  (void)phi;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (psi[k] > y[k] + tol) return false;
    if (y[k] > psi[k] + delta + tol) return false;
  }
  return true;
}

DiffusionStats compute_sigma2(const StaticPlan& plan) {
  const NetworkSpec& net = plan.net;
  const int m = net.num_buffers;
  const int n = net.num_activities;

  DiffusionStats out;
  out.gamma0 = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    const double lambda = net.arrival_rate(k);
    if (lambda == 0.0) continue;
    // lambda_k Var(u_k) with u_k = ubar/lambda_k reduces to Var(ubar)/lambda_k.
    out.gamma0(k, k) = net.interarrival[k].variance() / lambda;
  }

  out.gamma = out.gamma0;
  out.omega.reserve(n);
  out.gamma_j.reserve(n);
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd omega(m, m);
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < m; ++l) {
        omega(k, l) = net.routing(j, k) * ((k == l ? 1.0 : 0.0) - net.routing(j, l));
      }
    }
    const Eigen::VectorXd rj = net.io_matrix.col(j);
    const double var_vj =
        net.mean_service(j) * net.mean_service(j) * net.service[j].variance();
    Eigen::MatrixXd gj = (omega + rj * rj.transpose() * var_vj) / net.mean_service(j);
    out.gamma += plan.rates(j) * gj;
    out.omega.push_back(std::move(omega));
    out.gamma_j.push_back(std::move(gj));
  }
  out.sigma2 = plan.workload_weights.dot(out.gamma * plan.workload_weights);
  return out;
}

double rbm_tail(double w, double t, double sigma) {
  if (!(t > 0.0)) throw DomainError("rbm_tail needs t > 0");
  if (!(sigma > 0.0)) throw DomainError("rbm_tail needs sigma > 0");
  if (w <= 0.0) return 1.0;
  return 2.0 * normal_cdf(-w / (sigma * std::sqrt(t)));
}

CollapseStat collapse_statistic(const ScaledPath& scaled, const StaticPlan& plan,
                                double period_length) {
  CollapseStat out;
  out.bound = queue_bound_rate(plan) * period_length / scaled.r;
  const int m = static_cast<int>(scaled.queue.cols());
  if (m > 1) {
    out.statistic = scaled.queue.rightCols(m - 1).maxCoeff();
  }
  return out;
}

}  // namespace crpnet
