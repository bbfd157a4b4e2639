#include "crpnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <sstream>
#include <thread>

#include "crpnet/json_io.hpp"
#include "json.hpp"

namespace crpnet {

using nlohmann::json;
using nlohmann::ordered_json;

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("experiment config parse failure: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.network_file = doc.at("network").get<std::string>();
  if (doc.contains("policies")) cfg.policies = doc["policies"].get<std::vector<std::string>>();
  if (doc.contains("r_values")) cfg.r_values = doc["r_values"].get<std::vector<int>>();
  if (doc.contains("eps2")) cfg.eps2 = doc["eps2"].get<double>();
  if (doc.contains("horizon_T")) cfg.horizon_T = doc["horizon_T"].get<double>();
  if (doc.contains("replications")) cfg.replications = doc["replications"].get<int>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("tail_levels")) cfg.tail_levels = doc["tail_levels"].get<std::vector<double>>();
  if (doc.contains("tail_times")) cfg.tail_times = doc["tail_times"].get<std::vector<double>>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (cfg.replications < 1) throw DomainError("replications must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

namespace {

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json doc;
  doc["network"] = cfg.network_file;
  doc["policies"] = cfg.policies;
  doc["r_values"] = cfg.r_values;
  doc["eps2"] = cfg.eps2;
  doc["horizon_T"] = cfg.horizon_T;
  doc["replications"] = cfg.replications;
  doc["seed"] = cfg.seed;
  doc["output_dir"] = cfg.output_dir;
  doc["tail_levels"] = cfg.tail_levels;
  doc["tail_times"] = cfg.tail_times;
  doc["threads"] = cfg.threads;
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  return parse_experiment_config(doc.dump());
}

// State lookup at one raw time: last sample at or before tau.
const EventSample& sample_at(const Trajectory& traj, double tau) {
  auto it = std::upper_bound(
      traj.samples.begin(), traj.samples.end(), tau,
      [](double t, const EventSample& s) { return t < s.t; });
  if (it == traj.samples.begin()) return traj.samples.front();
  return *(it - 1);
}

struct RepStats {
  std::vector<char> cost_exceed;  // one flag per (t, level)
  std::vector<char> w_exceed;
  double collapse = 0.0;
  double good_fraction = -1.0;
  double case2_fraction = -1.0;
  double average_cost = 0.0;
};

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  return config_json(cfg).dump(2);
}

bool operator==(const TailStat& a, const TailStat& b) {
  return a.kind == b.kind && a.t == b.t && a.level == b.level && a.p_hat == b.p_hat &&
         a.std_err == b.std_err && a.reference == b.reference;
}

bool operator==(const CellResult& a, const CellResult& b) {
  return a.policy == b.policy && a.r == b.r && a.period_length == b.period_length &&
         a.horizon_raw == b.horizon_raw && a.replications == b.replications &&
         a.tails == b.tails && a.collapse_median == b.collapse_median &&
         a.collapse_bound == b.collapse_bound &&
         a.collapse_below_bound_fraction == b.collapse_below_bound_fraction &&
         a.good_event_fraction == b.good_event_fraction &&
         a.case2_fraction == b.case2_fraction &&
         a.mean_average_cost == b.mean_average_cost;
}

bool operator==(const ResultTable& a, const ResultTable& b) {
  return a.sigma2 == b.sigma2 &&
         a.cheapest_cost_per_workload == b.cheapest_cost_per_workload &&
         a.cells == b.cells &&
         experiment_config_to_json(a.config) == experiment_config_to_json(b.config);
}

ResultTable run_experiment(const ExperimentConfig& cfg, const StaticPlan& plan) {
  ResultTable table;
  table.config = cfg;
  const DiffusionStats stats = compute_sigma2(plan);
  table.sigma2 = stats.sigma2;
  const double h1_over_y1 = plan.net.holding_cost(0) / plan.workload_weights(0);
  table.cheapest_cost_per_workload = h1_over_y1;
  const double sigma = std::sqrt(stats.sigma2);

  std::vector<double> times = cfg.tail_times;
  if (times.empty()) times = {0.5 * cfg.horizon_T, cfg.horizon_T};

  for (const std::string& policy_name : cfg.policies) {
    const PolicyKind kind = policy_kind_from_name(policy_name);
    for (const int r : cfg.r_values) {
      const PolicyParams params = scale_parameters(r, cfg.eps2, plan);
      const double horizon_raw = static_cast<double>(r) * r * cfg.horizon_T;

      // (t, level) grid; defaults center the check where the reference
      // distribution has slope.
      std::vector<std::pair<double, double>> grid;
      for (double t : times) {
        if (cfg.tail_levels.empty()) {
          for (double mult : {0.5, 1.0, 1.5}) {
            grid.emplace_back(t, mult * h1_over_y1 * sigma * std::sqrt(t));
          }
        } else {
          for (double x : cfg.tail_levels) grid.emplace_back(t, x);
        }
      }

      std::vector<RepStats> reps(cfg.replications);
      auto run_rep = [&](int rep) {
        Trajectory traj =
            kind == PolicyKind::DiscreteReview
                ? run_dr_trajectory(plan, params, horizon_raw, cfg.seed, rep)
                : run_baseline_trajectory(plan, params, horizon_raw, cfg.seed, kind, rep);
        RepStats& rs = reps[rep];
        rs.cost_exceed.resize(grid.size());
        rs.w_exceed.resize(grid.size());
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
          const auto [t, x] = grid[gi];
          const EventSample& s = sample_at(traj, r * static_cast<double>(r) * t);
          const double cost_scaled =
              plan.net.holding_cost.dot(s.queue.cast<double>()) / r;
          const double w_scaled = s.workload / r;
          rs.cost_exceed[gi] = cost_scaled > x ? 1 : 0;
          rs.w_exceed[gi] = w_scaled > x / h1_over_y1 ? 1 : 0;
        }
        const ScaledPath scaled = diffusion_scale(traj, plan, r, cfg.horizon_T);
        rs.collapse = collapse_statistic(scaled, plan, params.period_length).statistic;
        rs.average_cost =
            accumulate_cost(traj, plan.net.holding_cost, 0.0).average;
        if (kind == PolicyKind::DiscreteReview && !traj.periods.empty()) {
          const auto diags = monitor_good_events(traj, params, plan);
          int good = 0, case2 = 0;
          for (const auto& d : diags)
            if (d.all_good) ++good;
          for (const auto& pr : traj.periods)
            if (pr.plan.case_tag == 2) ++case2;
          rs.good_fraction = static_cast<double>(good) / diags.size();
          rs.case2_fraction = static_cast<double>(case2) / traj.periods.size();
        }
      };

      const int workers = std::max(1, cfg.threads);
      if (workers == 1) {
        for (int rep = 0; rep < cfg.replications; ++rep) run_rep(rep);
      } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&] {
            for (;;) {
              const int rep = next.fetch_add(1);
              if (rep >= cfg.replications) return;
              run_rep(rep);
            }
          });
        }
        for (auto& th : pool) th.join();
      }

      // Reduction in replication order, independent of the schedule above.
      CellResult cell;
      cell.policy = policy_name;
      cell.r = r;
      cell.period_length = params.period_length;
      cell.horizon_raw = horizon_raw;
      cell.replications = cfg.replications;
      const double nreps = cfg.replications;
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        long cost_hits = 0, w_hits = 0;
        for (const RepStats& rs : reps) {
          cost_hits += rs.cost_exceed[gi];
          w_hits += rs.w_exceed[gi];
        }
        const auto [t, x] = grid[gi];
        const double ref = rbm_tail(x / h1_over_y1, t, sigma);
        TailStat cost_stat{"tail_cost", t, x, cost_hits / nreps,
                           std::sqrt(cost_hits / nreps * (1.0 - cost_hits / nreps) / nreps),
                           ref};
        TailStat w_stat{"tail_w", t, x / h1_over_y1, w_hits / nreps,
                        std::sqrt(w_hits / nreps * (1.0 - w_hits / nreps) / nreps), ref};
        cell.tails.push_back(cost_stat);
        cell.tails.push_back(w_stat);
      }

      std::vector<double> collapse(cfg.replications);
      double cost_sum = 0.0, good_sum = 0.0, case2_sum = 0.0;
      int dr_reps = 0;
      cell.collapse_bound =
          queue_bound_rate(plan) * params.period_length / r;
      int below = 0;
      for (int rep = 0; rep < cfg.replications; ++rep) {
        collapse[rep] = reps[rep].collapse;
        if (reps[rep].collapse <= cell.collapse_bound) ++below;
        cost_sum += reps[rep].average_cost;
        if (reps[rep].good_fraction >= 0.0) {
          good_sum += reps[rep].good_fraction;
          case2_sum += reps[rep].case2_fraction;
          ++dr_reps;
        }
      }
      std::sort(collapse.begin(), collapse.end());
      const std::size_t mid = collapse.size() / 2;
      cell.collapse_median = collapse.size() % 2 == 1
                                 ? collapse[mid]
                                 : 0.5 * (collapse[mid - 1] + collapse[mid]);
      cell.collapse_below_bound_fraction = below / nreps;
      cell.mean_average_cost = cost_sum / nreps;
      if (dr_reps > 0) {
        cell.good_event_fraction = good_sum / dr_reps;
        cell.case2_fraction = case2_sum / dr_reps;
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

std::string results_to_json(const ResultTable& table) {
  ordered_json doc;
  doc["config"] = config_json(table.config);
  doc["sigma2"] = table.sigma2;
  doc["cheapest_cost_per_workload"] = table.cheapest_cost_per_workload;
  doc["cells"] = ordered_json::array();
  for (const CellResult& cell : table.cells) {
    ordered_json jc;
    jc["policy"] = cell.policy;
    jc["r"] = cell.r;
    jc["period_length"] = cell.period_length;
    jc["horizon_raw"] = cell.horizon_raw;
    jc["replications"] = cell.replications;
    jc["tails"] = ordered_json::array();
    for (const TailStat& ts : cell.tails) {
      jc["tails"].push_back({{"kind", ts.kind},
                             {"t", ts.t},
                             {"level", ts.level},
                             {"p_hat", ts.p_hat},
                             {"std_err", ts.std_err},
                             {"reference", ts.reference}});
    }
    jc["collapse_median"] = cell.collapse_median;
    jc["collapse_bound"] = cell.collapse_bound;
    jc["collapse_below_bound_fraction"] = cell.collapse_below_bound_fraction;
    jc["good_event_fraction"] = cell.good_event_fraction;
    jc["case2_fraction"] = cell.case2_fraction;
    jc["mean_average_cost"] = cell.mean_average_cost;
    doc["cells"].push_back(jc);
  }
  return doc.dump(2);
}

ResultTable results_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("results parse failure: ") + e.what());
  }
  ResultTable table;
  table.config = config_from_json(doc.at("config"));
  table.sigma2 = doc.at("sigma2").get<double>();
  table.cheapest_cost_per_workload = doc.at("cheapest_cost_per_workload").get<double>();
  for (const auto& jc : doc.at("cells")) {
    CellResult cell;
    cell.policy = jc.at("policy").get<std::string>();
    cell.r = jc.at("r").get<int>();
    cell.period_length = jc.at("period_length").get<double>();
    cell.horizon_raw = jc.at("horizon_raw").get<double>();
    cell.replications = jc.at("replications").get<int>();
    for (const auto& jt : jc.at("tails")) {
      TailStat ts;
      ts.kind = jt.at("kind").get<std::string>();
      ts.t = jt.at("t").get<double>();
      ts.level = jt.at("level").get<double>();
      ts.p_hat = jt.at("p_hat").get<double>();
      ts.std_err = jt.at("std_err").get<double>();
      ts.reference = jt.at("reference").get<double>();
      cell.tails.push_back(ts);
    }
    cell.collapse_median = jc.at("collapse_median").get<double>();
    cell.collapse_bound = jc.at("collapse_bound").get<double>();
    cell.collapse_below_bound_fraction =
        jc.at("collapse_below_bound_fraction").get<double>();
    cell.good_event_fraction = jc.at("good_event_fraction").get<double>();
    cell.case2_fraction = jc.at("case2_fraction").get<double>();
    cell.mean_average_cost = jc.at("mean_average_cost").get<double>();
    table.cells.push_back(std::move(cell));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  {
    const fs::path path = fs::path(dir) / "results.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "policy,r,statistic,t,level,value,stderr,reference\n";
    for (const CellResult& cell : table.cells) {
      for (const TailStat& ts : cell.tails) {
        out << cell.policy << ',' << cell.r << ',' << ts.kind << ','
            << format_double(ts.t) << ',' << format_double(ts.level) << ','
            << format_double(ts.p_hat) << ',' << format_double(ts.std_err) << ','
            << format_double(ts.reference) << '\n';
      }
      const auto row = [&](const std::string& stat, double value, double ref) {
        out << cell.policy << ',' << cell.r << ',' << stat << ",,,"
            << format_double(value) << ",," << (std::isnan(ref) ? "" : format_double(ref))
            << '\n';
      };
      row("collapse_median", cell.collapse_median, cell.collapse_bound);
      row("collapse_below_bound_fraction", cell.collapse_below_bound_fraction,
          std::numeric_limits<double>::quiet_NaN());
      if (cell.good_event_fraction >= 0.0) {
        row("good_event_fraction", cell.good_event_fraction,
            std::numeric_limits<double>::quiet_NaN());
        row("case2_fraction", cell.case2_fraction,
            std::numeric_limits<double>::quiet_NaN());
      }
      row("mean_average_cost", cell.mean_average_cost,
          std::numeric_limits<double>::quiet_NaN());
    }
    if (!out) throw IoError("write failure: " + path.string());
  }
  {
    const fs::path path = fs::path(dir) / "results.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << results_to_json(table) << '\n';
    if (!out) throw IoError("write failure: " + path.string());
  }
  {
    const fs::path path = fs::path(dir) / "manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    ordered_json doc;
    doc["config"] = config_json(table.config);
    doc["seed"] = table.config.seed;
    doc["version"] = kVersion;
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failure: " + path.string());
  }
}

}  // namespace crpnet
