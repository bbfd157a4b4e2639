#pragma once

#include <string>

#include "crpnet/network.hpp"
#include "crpnet/policy.hpp"
#include "crpnet/scaling.hpp"
#include "crpnet/simulator.hpp"
#include "crpnet/static_plan.hpp"

namespace crpnet {

// Network file format: one JSON document with top-level keys `buffers`
// (array of {name, lambda, holding_cost, interarrival:{family, params,
// eps1}}), `servers` (array of names), `activities` (array of {server,
// buffer, mean_service, service:{family, params, eps1}, routing:[{to,
// prob}]}). Buffers and servers are referenced by name.
NetworkSpec load_network(const std::string& path);
NetworkSpec parse_network(const std::string& json_text);
std::string network_to_json(const NetworkSpec& net);

// Planner output (rates, duals, policy matrix, constants) as JSON, reported
// in original buffer labels alongside the permutation actually used.
std::string plan_to_json(const StaticPlan& plan);

std::string assumption_report_to_json(const AssumptionReport& rep,
                                      const StaticLpResult& lp);

std::string review_plan_to_json(const ReviewPlan& rp, const StaticPlan& plan);

// Events CSV: t, type, entity, Z per buffer (original labels), W, then the
// cumulative state columns needed to rebuild scaled paths (busy times,
// idleness, arrivals, completions, centered routing, serving flags, cost).
void write_events_csv(const Trajectory& traj, const StaticPlan& plan,
                      const std::string& path);

// Periods CSV: k, tau, case, idle, exec plus the per-period good-event flags.
void write_periods_csv(const Trajectory& traj, const PolicyParams& params,
                       const StaticPlan& plan, const std::string& path);

// Reads an events CSV written by write_events_csv back into a Trajectory
// (samples only; period records are not round-tripped).
Trajectory read_events_csv(const std::string& path, const StaticPlan& plan);

void write_scaled_csv(const ScaledPath& scaled, const std::string& path);

// Deterministic shortest-exact formatting used for all emitted numbers.
std::string format_double(double v);

}  // namespace crpnet
