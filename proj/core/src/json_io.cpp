#include "crpnet/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace crpnet {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  // Shortest decimal form that round-trips; deterministic across runs.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

std::string param_key(DistFamily family) {
  switch (family) {
    case DistFamily::Uniform: return "half_width";
    case DistFamily::Gamma: return "shape";
    case DistFamily::Lognormal: return "sigma";
    case DistFamily::Pareto: return "alpha";
    default: return "";
  }
}

DistributionSpec parse_dist(const json& jd) {
  DistributionSpec d;
  d.family = dist_family_from_name(jd.at("family").get<std::string>());
  const std::string key = param_key(d.family);
  if (!key.empty()) {
    d.shape = jd.at("params").at(key).get<double>();
  }
  if (jd.contains("eps1")) d.eps1 = jd.at("eps1").get<double>();
  d.validate();
  return d;
}

ordered_json dist_to_json(const DistributionSpec& d) {
  ordered_json jd;
  jd["family"] = d.family_name();
  jd["params"] = ordered_json::object();
  const std::string key = param_key(d.family);
  if (!key.empty()) jd["params"][key] = d.shape;
  jd["eps1"] = d.eps1;
  return jd;
}

int index_of(const std::vector<std::string>& names, const std::string& name,
             const std::string& what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw StructuralError("unknown " + what + " name: " + name);
}

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json mat_to_json(const Eigen::MatrixXd& mat) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < mat.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < mat.cols(); ++c) row.push_back(mat(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

NetworkSpec parse_network(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("network JSON parse failure: ") + e.what());
  }

  NetworkSpec net;
  const auto& buffers = doc.at("buffers");
  const auto& servers = doc.at("servers");
  const auto& activities = doc.at("activities");
  net.num_buffers = static_cast<int>(buffers.size());
  net.num_servers = static_cast<int>(servers.size());
  net.num_activities = static_cast<int>(activities.size());

  net.arrival_rate.resize(net.num_buffers);
  net.holding_cost.resize(net.num_buffers);
  net.interarrival.resize(net.num_buffers);
  for (int i = 0; i < net.num_buffers; ++i) {
    const auto& jb = buffers[i];
    net.buffer_names.push_back(jb.at("name").get<std::string>());
    net.arrival_rate(i) = jb.at("lambda").get<double>();
    net.holding_cost(i) = jb.at("holding_cost").get<double>();
    if (net.arrival_rate(i) != 0.0) {
      net.interarrival[i] = parse_dist(jb.at("interarrival"));
    }
  }
  for (const auto& js : servers) {
    net.server_names.push_back(js.get<std::string>());
  }

  net.routing = Eigen::MatrixXd::Zero(net.num_activities, net.num_buffers);
  net.mean_service.resize(net.num_activities);
  net.service.resize(net.num_activities);
  for (int j = 0; j < net.num_activities; ++j) {
    const auto& ja = activities[j];
    net.activity_server.push_back(
        index_of(net.server_names, ja.at("server").get<std::string>(), "server"));
    net.activity_buffer.push_back(
        index_of(net.buffer_names, ja.at("buffer").get<std::string>(), "buffer"));
    net.mean_service(j) = ja.at("mean_service").get<double>();
    net.service[j] = parse_dist(ja.at("service"));
    if (ja.contains("routing")) {
      for (const auto& jr : ja.at("routing")) {
        const int dest = index_of(net.buffer_names, jr.at("to").get<std::string>(), "buffer");
        net.routing(j, dest) += jr.at("prob").get<double>();
      }
    }
  }
  if (doc.contains("discount_rate")) {
    net.discount_rate = doc.at("discount_rate").get<double>();
  }
  return net;
}

NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string network_to_json(const NetworkSpec& net) {
  ordered_json doc;
  doc["buffers"] = ordered_json::array();
  for (int i = 0; i < net.num_buffers; ++i) {
    ordered_json jb;
    jb["name"] = i < static_cast<int>(net.buffer_names.size())
                     ? net.buffer_names[i]
                     : "b" + std::to_string(i + 1);
    jb["lambda"] = net.arrival_rate(i);
    jb["holding_cost"] = net.holding_cost(i);
    if (net.arrival_rate(i) != 0.0) {
      jb["interarrival"] = dist_to_json(net.interarrival[i]);
    }
    doc["buffers"].push_back(jb);
  }
  doc["servers"] = ordered_json::array();
  for (int k = 0; k < net.num_servers; ++k) {
    doc["servers"].push_back(k < static_cast<int>(net.server_names.size())
                                 ? net.server_names[k]
                                 : "s" + std::to_string(k + 1));
  }
  doc["activities"] = ordered_json::array();
  for (int j = 0; j < net.num_activities; ++j) {
    ordered_json ja;
    ja["server"] = doc["servers"][net.activity_server[j]];
    ja["buffer"] = doc["buffers"][net.activity_buffer[j]]["name"];
    ja["mean_service"] = net.mean_service(j);
    ja["service"] = dist_to_json(net.service[j]);
    ordered_json routing = ordered_json::array();
    for (int l = 0; l < net.num_buffers; ++l) {
      if (net.routing(j, l) > 0.0) {
        routing.push_back({{"to", doc["buffers"][l]["name"]},
                           {"prob", net.routing(j, l)}});
      }
    }
    ja["routing"] = routing;
    doc["activities"].push_back(ja);
  }
  if (net.discount_rate != 0.0) doc["discount_rate"] = net.discount_rate;
  return doc.dump(2);
}

namespace {

// Reorders a permuted-coordinates buffer vector back to original labels.
template <class Vec>
Eigen::VectorXd to_original(const Vec& permuted, const std::vector<int>& perm) {
  Eigen::VectorXd out(permuted.size());
  for (int i = 0; i < permuted.size(); ++i) {
    out(perm[i]) = static_cast<double>(permuted(i));
  }
  return out;
}

}  // namespace

std::string plan_to_json(const StaticPlan& plan) {
  ordered_json doc;
  doc["rates"] = vec_to_json(plan.rates);
  doc["utilization"] = plan.utilization;
  doc["basic_activities"] = plan.basic;
  doc["workload_weights"] = vec_to_json(to_original(plan.workload_weights, plan.buffer_perm));
  doc["server_weights"] = vec_to_json(plan.server_weights);
  doc["nonbasic_margin"] = vec_to_json(plan.nonbasic_margin);
  doc["buffer_order"] = plan.buffer_perm;  // position i holds the original label
  doc["policy_matrix"] = mat_to_json(plan.policy_matrix);
  doc["policy_matrix_inv"] = mat_to_json(plan.policy_matrix_inv);
  doc["c0"] = plan.c0;
  doc["c1"] = plan.c1;
  doc["safety_stock_rate"] = vec_to_json(to_original(plan.safety_stock_rate, plan.buffer_perm));
  doc["delta"] = plan.delta;
  doc["delta_bound"] = plan.delta_bound;
  return doc.dump(2);
}

std::string assumption_report_to_json(const AssumptionReport& rep,
                                      const StaticLpResult& lp) {
  ordered_json doc;
  doc["heavy_traffic"] = rep.heavy_traffic;
  doc["complete_resource_pooling"] = rep.crp;
  doc["basic_activity_per_buffer"] = rep.bab;
  doc["all"] = rep.all();
  doc["utilization"] = lp.utilization;
  doc["rates"] = vec_to_json(lp.rates);
  doc["basic_activities"] = lp.basic;
  if (!rep.detail.empty()) doc["detail"] = rep.detail;
  return doc.dump(2);
}

std::string review_plan_to_json(const ReviewPlan& rp, const StaticPlan& plan) {
  ordered_json doc;
  doc["case"] = rp.case_tag;
  doc["idle_time"] = rp.idle_time;
  doc["exec_time"] = rp.exec_time;
  doc["stretch"] = rp.stretch;
  doc["activity_time"] = vec_to_json(rp.activity_time);
  doc["target"] = vec_to_json(to_original(rp.target, plan.buffer_perm));
  ordered_json caps = ordered_json::array();
  for (int j = 0; j < rp.job_cap.size(); ++j) caps.push_back(rp.job_cap(j));
  doc["job_cap"] = caps;
  return doc.dump(2);
}

namespace {

const char* tag_name(EventTag tag) {
  switch (tag) {
    case EventTag::Init: return "init";
    case EventTag::Arrival: return "arrival";
    case EventTag::Completion: return "completion";
    case EventTag::Review: return "review";
    case EventTag::Final: return "final";
  }
  return "unknown";
}

EventTag tag_from_name(const std::string& s) {
  if (s == "init") return EventTag::Init;
  if (s == "arrival") return EventTag::Arrival;
  if (s == "completion") return EventTag::Completion;
  if (s == "review") return EventTag::Review;
  if (s == "final") return EventTag::Final;
  throw IoError("unknown event tag: " + s);
}

}  // namespace

void write_events_csv(const Trajectory& traj, const StaticPlan& plan,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const NetworkSpec& net = plan.net;
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int n = net.num_activities;

  out << "t,type,entity";
  for (int i = 0; i < m; ++i) out << ",Z" << plan.buffer_perm[i] + 1;
  out << ",W";
  for (int j = 0; j < n; ++j) out << ",T" << j + 1;
  for (int k = 0; k < p; ++k) out << ",I" << k + 1;
  for (int i = 0; i < m; ++i) out << ",E" << plan.buffer_perm[i] + 1;
  for (int j = 0; j < n; ++j) out << ",N" << j + 1;
  for (int i = 0; i < m; ++i) out << ",PHI" << plan.buffer_perm[i] + 1;
  out << ",serving,cost\n";

  for (const EventSample& s : traj.samples) {
    int entity = 0;  // 1-based original label; 0 when not tied to one entity
    if (s.entity >= 0) {
      entity = s.tag == EventTag::Arrival ? plan.buffer_perm[s.entity] + 1
                                          : s.entity + 1;
    }
    out << format_double(s.t) << ',' << tag_name(s.tag) << ',' << entity;
    for (int i = 0; i < m; ++i) out << ',' << s.queue(i);
    out << ',' << format_double(s.workload);
    for (int j = 0; j < n; ++j) out << ',' << format_double(s.busy(j));
    for (int k = 0; k < p; ++k) out << ',' << format_double(s.idle(k));
    for (int i = 0; i < m; ++i) out << ',' << s.arrivals(i);
    for (int j = 0; j < n; ++j) out << ',' << s.completions(j);
    for (int i = 0; i < m; ++i) out << ',' << format_double(s.routing_centered(i));
    out << ',' << s.serving_mask << ',' << format_double(s.cum_cost) << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

Trajectory read_events_csv(const std::string& path, const StaticPlan& plan) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open events CSV: " + path);
  const NetworkSpec& net = plan.net;
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int n = net.num_activities;

  Trajectory traj;
  traj.period_detail = false;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty events CSV: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    auto next = [&]() -> std::string {
      if (!std::getline(ss, field, ',')) throw IoError("short row in events CSV");
      return field;
    };
    EventSample s;
    s.t = std::stod(next());
    s.tag = tag_from_name(next());
    s.entity = std::stoi(next());
    s.queue.resize(m);
    for (int i = 0; i < m; ++i) s.queue(i) = std::stoi(next());
    s.workload = std::stod(next());
    s.busy.resize(n);
    for (int j = 0; j < n; ++j) s.busy(j) = std::stod(next());
    s.idle.resize(p);
    for (int k = 0; k < p; ++k) s.idle(k) = std::stod(next());
    s.arrivals.resize(m);
    for (int i = 0; i < m; ++i) s.arrivals(i) = std::stoi(next());
    s.completions.resize(n);
    for (int j = 0; j < n; ++j) s.completions(j) = std::stoi(next());
    s.routing_centered.resize(m);
    for (int i = 0; i < m; ++i) s.routing_centered(i) = std::stod(next());
    s.serving_mask = std::stoull(next());
    s.cum_cost = std::stod(next());
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.empty()) throw IoError("events CSV has no samples: " + path);
  traj.initial_queue = traj.samples.front().queue;
  traj.horizon = traj.samples.back().t;
  return traj;
}

void write_periods_csv(const Trajectory& traj, const PolicyParams& params,
                       const StaticPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "k,tau,case,idle,Texe,A,B,C,D,E,N\n";
  if (!traj.period_detail) {
    if (!out) throw IoError("write failure: " + path);
    return;
  }
  const std::vector<PeriodDiagnostics> diags = monitor_good_events(traj, params, plan);
  for (std::size_t k = 0; k < traj.periods.size(); ++k) {
    const PeriodRecord& pr = traj.periods[k];
    const PeriodDiagnostics& d = diags[k];
    out << pr.index << ',' << format_double(pr.start) << ',' << pr.plan.case_tag << ','
        << format_double(pr.plan.idle_time) << ',' << format_double(pr.plan.exec_time)
        << ',' << d.ball_both_ends << ',' << d.queues_bounded << ','
        << d.completions_runaway << ',' << d.residuals_small << ',' << d.no_idle_above
        << ',' << d.all_good << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

void write_scaled_csv(const ScaledPath& scaled, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const int m = static_cast<int>(scaled.queue.cols());
  const int p = static_cast<int>(scaled.idle.cols());
  const int n = static_cast<int>(scaled.fluid_busy.cols());
  out << "t";
  for (int i = 0; i < m; ++i) out << ",Zhat" << i + 1;
  out << ",What,IWhat,XWhat";
  for (int k = 0; k < p; ++k) out << ",Ihat" << k + 1;
  for (int j = 0; j < n; ++j) out << ",Tbar" << j + 1;
  for (int j = 0; j < n; ++j) out << ",Sbar" << j + 1;
  out << "\n";
  for (std::size_t g = 0; g < scaled.t.size(); ++g) {
    out << format_double(scaled.t[g]);
    for (int i = 0; i < m; ++i) out << ',' << format_double(scaled.queue(g, i));
    out << ',' << format_double(scaled.workload(g)) << ','
        << format_double(scaled.idle_workload(g)) << ','
        << format_double(scaled.netflow_workload(g));
    for (int k = 0; k < p; ++k) out << ',' << format_double(scaled.idle(g, k));
    for (int j = 0; j < n; ++j) out << ',' << format_double(scaled.fluid_busy(g, j));
    for (int j = 0; j < n; ++j) out << ',' << format_double(scaled.fluid_completions(g, j));
    out << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace crpnet
