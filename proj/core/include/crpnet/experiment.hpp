#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crpnet/scaling.hpp"
#include "crpnet/simulator.hpp"

namespace crpnet {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string network_file;
  std::vector<std::string> policies = {"dr"};
  std::vector<int> r_values = {8, 16, 32};
  double eps2 = 0.1;
  double horizon_T = 1.0;  // diffusion time units; raw horizon is r^2 * T
  int replications = 100;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  // Cost levels for the tail statistics. Empty means the default grid
  //
  //   {0.5, 1.0, 1.5} * (h1/y1) * sigma * sqrt(t),
  //
  // centered where the reference distribution has slope.
  std::vector<double> tail_levels;
  std::vector<double> tail_times;  // empty means {0.5, 1.0} * horizon_T
  int threads = 1;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct TailStat {
  std::string kind;  // "tail_cost" (h'Zhat) or "tail_w" (What)
  double t = 0.0;
  double level = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;    // binomial, sqrt(p(1-p)/reps)
  double reference = 0.0;  // reflected-Brownian-motion tail
};

struct CellResult {
  std::string policy;
  int r = 0;
  double period_length = 0.0;
  double horizon_raw = 0.0;
  int replications = 0;
  std::vector<TailStat> tails;
  double collapse_median = 0.0;
  double collapse_bound = 0.0;
  double collapse_below_bound_fraction = 0.0;
  // Review-policy cells only; -1 for baselines.
  double good_event_fraction = -1.0;
  double case2_fraction = -1.0;
  double mean_average_cost = 0.0;
};

struct ResultTable {
  ExperimentConfig config;
  double sigma2 = 0.0;
  double cheapest_cost_per_workload = 0.0;  // h1/y1 in ordered coordinates
  std::vector<CellResult> cells;
};

bool operator==(const TailStat& a, const TailStat& b);
bool operator==(const CellResult& a, const CellResult& b);
bool operator==(const ResultTable& a, const ResultTable& b);

// Runs every (policy, r) cell: replication k simulates to r^2*T with
// streams keyed by (seed, k), diffusion-scales, and contributes its
// statistics. Replications may run on `threads` workers; per-replication
// streams and a reduction ordered by replication index make the result
// independent of the schedule.
ResultTable run_experiment(const ExperimentConfig& cfg, const StaticPlan& plan);

std::string results_to_json(const ResultTable& table);
ResultTable results_from_json(const std::string& json_text);

// Writes results.csv, results.json and manifest.json into `dir`.
void emit_results(const ResultTable& table, const std::string& dir);

}  // namespace crpnet
