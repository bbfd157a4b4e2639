#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "crpnet/distribution.hpp"

namespace crpnet {

// First-order data of an open processing network: p servers, m buffers,
// n activities, where activity j pairs server s(j) with buffer b(j).
// Jobs finishing under activity j move to buffer l with probability
// routing(j, l) and exit with the leftover probability 1 - row sum.
struct NetworkSpec {
  int num_buffers = 0;    // m
  int num_servers = 0;    // p
  int num_activities = 0; // n

  std::vector<int> activity_server;  // s(j), 0-based, size n
  std::vector<int> activity_buffer;  // b(j), 0-based, size n

  Eigen::MatrixXd routing;       // n x m transition probabilities
  Eigen::VectorXd arrival_rate;  // lambda, jobs/time; zeros allowed, not all
  Eigen::VectorXd mean_service;  // time/job, > 0
  Eigen::VectorXd holding_cost;  // cost/(job*time), > 0
  double discount_rate = 0.0;    // used only for discounted-cost reporting

  std::vector<DistributionSpec> interarrival;  // size m; used where lambda > 0
  std::vector<DistributionSpec> service;       // size n

  std::vector<std::string> buffer_names;  // optional labels
  std::vector<std::string> server_names;

  // Derived first-order data, populated by validate_network.
  Eigen::MatrixXd capacity;      // A: p x n, one 1 per column
  Eigen::MatrixXd constituency;  // C: m x n, one 1 per column
  Eigen::MatrixXd io_matrix;     // R = (C - P') M^{-1}
  Eigen::VectorXd service_rate;  // mu_j = 1/m_j
  bool derived_ready = false;

  // Buffers with external arrivals.
  std::vector<int> arriving_buffers() const;
  // Most restrictive declared moment exponent across all distributions.
  double min_eps1() const;
};

struct ValidationIssue {
  std::string invariant;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> checks;
  bool ok() const;
  std::string summary() const;
};

// Checks every structural invariant and, on success, caches the derived
// matrices A, C, R, M on the spec. Does not throw; the report carries one
// entry per invariant.
ValidationReport validate_network(NetworkSpec& net);

// Same checks, but throws StructuralError naming the first violated
// invariant. Convenience for call sites that cannot proceed on failure.
void validate_network_or_throw(NetworkSpec& net);

// Relabels buffers: perm[i_new] = i_old. Reorders every buffer-indexed
// field and the routing columns consistently.
NetworkSpec permute_buffers(const NetworkSpec& net, const std::vector<int>& perm);

}  // namespace crpnet
