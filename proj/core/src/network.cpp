#include "crpnet/network.hpp"

#include <algorithm>
#include <sstream>

namespace crpnet {

std::vector<int> NetworkSpec::arriving_buffers() const {
  std::vector<int> out;
  for (int k = 0; k < num_buffers; ++k) {
    if (arrival_rate(k) != 0.0) out.push_back(k);
  }
  return out;
}

double NetworkSpec::min_eps1() const {
  double e = std::numeric_limits<double>::infinity();
  for (int k : arriving_buffers()) e = std::min(e, interarrival[k].eps1);
  for (const auto& d : service) e = std::min(e, d.eps1);
  return e;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationIssue& c) { return c.pass; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "pass" : "FAIL") << "  " << c.invariant;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

void add(ValidationReport& rep, const std::string& name, bool pass,
         const std::string& detail = "") {
  rep.checks.push_back({name, pass, detail});
}

}  // namespace

ValidationReport validate_network(NetworkSpec& net) {
  ValidationReport rep;
  const int m = net.num_buffers;
  const int p = net.num_servers;
  const int n = net.num_activities;

  const bool sizes_ok =
      m > 0 && p > 0 && n > 0 &&
      static_cast<int>(net.activity_server.size()) == n &&
      static_cast<int>(net.activity_buffer.size()) == n &&
      net.routing.rows() == n && net.routing.cols() == m &&
      net.arrival_rate.size() == m && net.mean_service.size() == n &&
      net.holding_cost.size() == m &&
      static_cast<int>(net.interarrival.size()) == m &&
      static_cast<int>(net.service.size()) == n;
  add(rep, "dimensions consistent", sizes_ok);
  if (!sizes_ok) return rep;

  bool maps_ok = true;
  for (int j = 0; j < n; ++j) {
    if (net.activity_server[j] < 0 || net.activity_server[j] >= p ||
        net.activity_buffer[j] < 0 || net.activity_buffer[j] >= m) {
      maps_ok = false;
    }
  }
  add(rep, "activity maps in range", maps_ok);
  if (!maps_ok) return rep;

  // A, C: exactly one 1 per column by construction; at least one per row.
  std::vector<int> server_count(p, 0), buffer_count(m, 0);
  for (int j = 0; j < n; ++j) {
    ++server_count[net.activity_server[j]];
    ++buffer_count[net.activity_buffer[j]];
  }
  int idle_server = -1, orphan_buffer = -1;
  for (int k = 0; k < p; ++k)
    if (server_count[k] == 0) idle_server = k;
  for (int i = 0; i < m; ++i)
    if (buffer_count[i] == 0) orphan_buffer = i;
  add(rep, "every server has an activity", idle_server < 0,
      idle_server < 0 ? "" : "server " + std::to_string(idle_server));
  add(rep, "every buffer has an activity", orphan_buffer < 0,
      orphan_buffer < 0 ? "" : "buffer " + std::to_string(orphan_buffer));

  bool routing_ok = true;
  std::string routing_detail;
  for (int j = 0; j < n && routing_ok; ++j) {
    double row_sum = 0.0;
    for (int l = 0; l < m; ++l) {
      const double pr = net.routing(j, l);
      if (pr < 0.0 || pr > 1.0) {
        routing_ok = false;
        routing_detail = "activity " + std::to_string(j) + " has probability outside [0,1]";
      }
      row_sum += pr;
    }
    if (routing_ok && row_sum > 1.0 + 1e-12) {
      routing_ok = false;
      routing_detail = "activity " + std::to_string(j) + " row sums to " + std::to_string(row_sum);
    }
  }
  add(rep, "routing rows are subprobabilities", routing_ok, routing_detail);

  bool rates_ok = true;
  for (int k = 0; k < m; ++k)
    if (net.arrival_rate(k) < 0.0) rates_ok = false;
  const bool some_arrival = net.arrival_rate.maxCoeff() > 0.0;
  add(rep, "arrival rates nonnegative", rates_ok);
  add(rep, "at least one arriving buffer", some_arrival);

  bool service_ok = true;
  for (int j = 0; j < n; ++j)
    if (!(net.mean_service(j) > 0.0)) service_ok = false;
  add(rep, "mean service times positive", service_ok);

  bool cost_ok = true;
  for (int i = 0; i < m; ++i)
    if (!(net.holding_cost(i) > 0.0)) cost_ok = false;
  add(rep, "holding costs positive", cost_ok);
  add(rep, "discount rate nonnegative", net.discount_rate >= 0.0);

  bool dists_ok = true;
  std::string dist_detail;
  for (int k = 0; k < m && dists_ok; ++k) {
    if (net.arrival_rate(k) == 0.0) continue;
    try {
      net.interarrival[k].validate();
      if (!net.interarrival[k].moment_finite()) {
        dists_ok = false;
        dist_detail = "interarrival moment 2+2*eps1 infinite for buffer " + std::to_string(k);
      }
    } catch (const StructuralError& e) {
      dists_ok = false;
      dist_detail = e.what();
    }
  }
  for (int j = 0; j < n && dists_ok; ++j) {
    try {
      net.service[j].validate();
      if (!net.service[j].moment_finite()) {
        dists_ok = false;
        dist_detail = "service moment 2+2*eps1 infinite for activity " + std::to_string(j);
      }
    } catch (const StructuralError& e) {
      dists_ok = false;
      dist_detail = e.what();
    }
  }
  add(rep, "distributions valid with finite declared moments", dists_ok, dist_detail);

  if (!rep.ok()) return rep;

  net.capacity = Eigen::MatrixXd::Zero(p, n);
  net.constituency = Eigen::MatrixXd::Zero(m, n);
  for (int j = 0; j < n; ++j) {
    net.capacity(net.activity_server[j], j) = 1.0;
    net.constituency(net.activity_buffer[j], j) = 1.0;
  }
  net.service_rate = net.mean_service.cwiseInverse();
  net.io_matrix = (net.constituency - net.routing.transpose()) *
                  net.service_rate.asDiagonal();
  net.derived_ready = true;
  return rep;
}

void validate_network_or_throw(NetworkSpec& net) {
  const ValidationReport rep = validate_network(net);
  for (const auto& c : rep.checks) {
    if (!c.pass) {
      throw StructuralError(c.invariant + (c.detail.empty() ? "" : ": " + c.detail));
    }
  }
}

NetworkSpec permute_buffers(const NetworkSpec& net, const std::vector<int>& perm) {
  const int m = net.num_buffers;
  if (static_cast<int>(perm.size()) != m) {
    throw StructuralError("buffer permutation has wrong size");
  }
  std::vector<int> inverse(m, -1);
  for (int i = 0; i < m; ++i) inverse[perm[i]] = i;
  for (int i = 0; i < m; ++i) {
    if (inverse[i] < 0) throw StructuralError("buffer permutation is not a bijection");
  }

  NetworkSpec out = net;
  out.derived_ready = false;
  for (int i = 0; i < m; ++i) {
    const int old = perm[i];
    out.arrival_rate(i) = net.arrival_rate(old);
    out.holding_cost(i) = net.holding_cost(old);
    out.interarrival[i] = net.interarrival[old];
    out.routing.col(i) = net.routing.col(old);
    if (static_cast<int>(net.buffer_names.size()) == m) {
      out.buffer_names[i] = net.buffer_names[old];
    }
  }
  for (int j = 0; j < net.num_activities; ++j) {
    out.activity_buffer[j] = inverse[net.activity_buffer[j]];
  }
  validate_network_or_throw(out);
  return out;
}

}  // namespace crpnet
