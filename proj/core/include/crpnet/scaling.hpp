#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "crpnet/simulator.hpp"

namespace crpnet {

// Diffusion-scaled processes on a time grid: time accelerated by r^2, space
// normalized by r, primitives centered at their rates.
struct ScaledPath {
  double r = 1.0;
  double T = 0.0;                    // grid spans [0, T] in scaled time
  std::vector<double> t;
  Eigen::MatrixXd queue;             // scaled queue lengths, grid x m
  Eigen::VectorXd workload;          // scaled workload y'Z/r
  Eigen::MatrixXd idle;              // scaled per-server idleness, grid x p
  Eigen::VectorXd idle_workload;     // pi-weighted scaled idleness
  Eigen::VectorXd netflow_workload;  // workload netflow reconstructed from
                                     // centered primitives (arrivals, routing,
                                     // completions); workload = netflow + idle_workload
  Eigen::MatrixXd fluid_busy;        // busy time / r^2, grid x n
  Eigen::MatrixXd fluid_completions; // completed jobs / r^2, grid x n
};

enum class GridMode {
  // 512 uniform points on [0, T] plus every review-point image. Default.
  Uniform,
  // Every event time in [0, r^2 T]; exact for path-integral checks.
  Events,
};

// Throws HorizonError when the trajectory is shorter than r^2 * T.
ScaledPath diffusion_scale(const Trajectory& traj, const StaticPlan& plan, double r,
                           double T, GridMode mode = GridMode::Uniform,
                           int uniform_points = 512);

// One-dimensional reflection of a step path: psi(t) = sup_{s<=t} x(s)^- and
// phi = x + psi, so phi is the path pushed up to stay nonnegative with
// minimal effort. psi is nondecreasing from 0 and increases only where phi
// sits at 0.
std::pair<std::vector<double>, std::vector<double>> regulator_map(
    const std::vector<double>& x);

// Verifies w = x + y, w >= 0, y nondecreasing from 0 and increasing only
// while w <= delta (throws PreconditionError listing violations), then
// returns true iff psi(x) <= y <= psi(x) + delta pointwise.
bool sandwich_check(const std::vector<double>& w, const std::vector<double>& x,
                    const std::vector<double>& y, double delta, double tol = 1e-9);

// Covariance structure of the limiting workload: gamma aggregates the
// renewal noise of arrivals and services plus the multinomial routing
// noise, and sigma2 = y' gamma y.
struct DiffusionStats {
  double sigma2 = 0.0;
  Eigen::MatrixXd gamma;                  // m x m
  Eigen::MatrixXd gamma0;                 // arrival part, diagonal
  std::vector<Eigen::MatrixXd> gamma_j;   // per activity
  std::vector<Eigen::MatrixXd> omega;     // routing covariance per activity
};

DiffusionStats compute_sigma2(const StaticPlan& plan);

// P(W*(t) > w) for reflected Brownian motion from 0 with zero drift and
// variance sigma^2: 2 N(-w / (sigma sqrt(t))). Throws DomainError for
// t <= 0 or sigma <= 0; w <= 0 gives 1.
double rbm_tail(double w, double t, double sigma);

struct CollapseStat {
  double statistic = 0.0;  // max over non-cheapest buffers of sup scaled queue
  double bound = 0.0;      // reference bound, queue_bound_rate * l / r
};

CollapseStat collapse_statistic(const ScaledPath& scaled, const StaticPlan& plan,
                                double period_length);

}  // namespace crpnet
