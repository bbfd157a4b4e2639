#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crpnet/experiment.hpp"
#include "crpnet/json_io.hpp"
#include "crpnet/policy.hpp"
#include "crpnet/scaling.hpp"
#include "crpnet/simulator.hpp"
#include "crpnet/static_plan.hpp"

namespace {

using namespace crpnet;

StaticPlan plan_from_file(const std::string& path) {
  NetworkSpec net = load_network(path);
  return make_static_plan(net);
}

int cmd_plan(const std::string& network_file) {
  std::cout << plan_to_json(plan_from_file(network_file)) << "\n";
  return 0;
}

int cmd_check(const std::string& network_file) {
  NetworkSpec net = load_network(network_file);
  const ValidationReport vrep = validate_network(net);
  if (!vrep.ok()) {
    std::cerr << vrep.summary();
    return 2;
  }
  StaticLpResult lp;
  try {
    lp = solve_static_plan(net);
  } catch (const Error& e) {
    std::cerr << "static planning failed: " << e.what() << "\n";
    return 2;
  }
  const AssumptionReport rep = verify_assumptions(lp, net);
  std::cout << assumption_report_to_json(rep, lp) << "\n";
  return rep.all() ? 0 : 2;
}

int cmd_policy_step(const std::string& network_file, double l, const std::string& q_csv) {
  const StaticPlan plan = plan_from_file(network_file);
  std::vector<double> q_orig;
  std::stringstream ss(q_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) q_orig.push_back(std::stod(tok));
  if (static_cast<int>(q_orig.size()) != plan.net.num_buffers) {
    throw DomainError("expected " + std::to_string(plan.net.num_buffers) +
                      " queue entries, got " + std::to_string(q_orig.size()));
  }
  Eigen::VectorXd q(plan.net.num_buffers);
  for (int i = 0; i < plan.net.num_buffers; ++i) q(i) = q_orig[plan.buffer_perm[i]];
  const PolicyParams params = params_for_length(l, plan);
  const ReviewPlan rp = make_plan(q, params, plan);
  std::cout << review_plan_to_json(rp, plan) << "\n";
  return 0;
}

int cmd_simulate(const std::string& network_file, const std::string& policy, int r,
                 double eps2, double horizon_T, std::uint64_t seed,
                 const std::string& out_dir) {
  const StaticPlan plan = plan_from_file(network_file);
  const PolicyParams params = scale_parameters(r, eps2, plan);
  const double horizon = static_cast<double>(r) * r * horizon_T;
  const PolicyKind kind = policy_kind_from_name(policy);
  const Trajectory traj =
      kind == PolicyKind::DiscreteReview
          ? run_dr_trajectory(plan, params, horizon, seed)
          : run_baseline_trajectory(plan, params, horizon, seed, kind);
  std::filesystem::create_directories(out_dir);
  write_events_csv(traj, plan, (std::filesystem::path(out_dir) / "events.csv").string());
  write_periods_csv(traj, params, plan,
                    (std::filesystem::path(out_dir) / "periods.csv").string());
  std::cout << "events: " << traj.samples.size()
            << ", periods: " << traj.periods.size() << "\n";
  return 0;
}

int cmd_sigma(const std::string& network_file) {
  const StaticPlan plan = plan_from_file(network_file);
  const DiffusionStats stats = compute_sigma2(plan);
  std::cout << "{\n  \"sigma2\": " << format_double(stats.sigma2) << ",\n  \"gamma\": [";
  for (int i = 0; i < stats.gamma.rows(); ++i) {
    std::cout << (i ? ", " : "") << "[";
    for (int j = 0; j < stats.gamma.cols(); ++j) {
      std::cout << (j ? ", " : "") << format_double(stats.gamma(i, j));
    }
    std::cout << "]";
  }
  std::cout << "]\n}\n";
  return 0;
}

int cmd_scale(const std::string& traj_file, const std::string& network_file, int r,
              double T, const std::string& out_file) {
  const StaticPlan plan = plan_from_file(network_file);
  const Trajectory traj = read_events_csv(traj_file, plan);
  const double window = T > 0.0 ? T : traj.samples.back().t / (static_cast<double>(r) * r);
  const ScaledPath scaled = diffusion_scale(traj, plan, r, window);
  write_scaled_csv(scaled, out_file);
  std::cout << "grid points: " << scaled.t.size() << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_file) {
  const ExperimentConfig cfg = load_experiment_config(config_file);
  StaticPlan plan;
  try {
    plan = plan_from_file(cfg.network_file);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return 2;
  }
  const ResultTable table = run_experiment(cfg, plan);
  emit_results(table, cfg.output_dir);
  std::cout << "wrote results to " << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and control library for open processing networks "
               "with pooled resources under a discrete review policy"};
  app.require_subcommand(1);

  std::string network_file, q_csv, policy = "dr", out = "out", traj_file, config_file;
  double l = 100.0, eps2 = 0.1, horizon_T = 1.0, T = 0.0;
  int r = 8;
  std::uint64_t seed = 0;

  auto* plan_cmd = app.add_subcommand("plan", "Solve the static plan and print all policy data");
  plan_cmd->add_option("network", network_file, "network JSON file")->required();

  auto* check_cmd =
      app.add_subcommand("check", "Verify heavy traffic, resource pooling and drain assumptions");
  check_cmd->add_option("network", network_file, "network JSON file")->required();

  auto* step_cmd = app.add_subcommand("policy-step", "Print one review period's plan");
  step_cmd->add_option("--network", network_file)->required();
  step_cmd->add_option("--l", l, "nominal period length")->required();
  step_cmd->add_option("--q", q_csv, "queue contents, comma separated, original labels")
      ->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Run one trajectory and write event/period CSVs");
  sim_cmd->add_option("--network", network_file)->required();
  sim_cmd->add_option("--policy", policy, "dr|priority|longest-queue");
  sim_cmd->add_option("--r", r, "scale index; period length is r^(1-eps2)")->required();
  sim_cmd->add_option("--eps2", eps2);
  sim_cmd->add_option("--horizon", horizon_T, "horizon in scaled time units (raw r^2 * horizon)");
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--out", out, "output directory");

  auto* sigma_cmd = app.add_subcommand("sigma", "Print the workload variance parameter");
  sigma_cmd->add_option("--network", network_file)->required();

  auto* scale_cmd = app.add_subcommand("scale", "Diffusion-scale an events CSV");
  scale_cmd->add_option("--traj", traj_file, "events.csv from simulate")->required();
  scale_cmd->add_option("--network", network_file)->required();
  scale_cmd->add_option("--r", r)->required();
  scale_cmd->add_option("--T", T, "scaled window (default: whole trajectory)");
  scale_cmd->add_option("--out", out, "output CSV path");

  auto* exp_cmd = app.add_subcommand("experiment", "Run a replication study from a config file");
  exp_cmd->add_option("--config", config_file)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd) return cmd_plan(network_file);
    if (*check_cmd) return cmd_check(network_file);
    if (*step_cmd) return cmd_policy_step(network_file, l, q_csv);
    if (*sim_cmd) return cmd_simulate(network_file, policy, r, eps2, horizon_T, seed, out);
    if (*sigma_cmd) return cmd_sigma(network_file);
    if (*scale_cmd) return cmd_scale(traj_file, network_file, r, T,
                                     out == "out" ? "scaled.csv" : out);
    if (*exp_cmd) return cmd_experiment(config_file);
  } catch (const crpnet::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const crpnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
