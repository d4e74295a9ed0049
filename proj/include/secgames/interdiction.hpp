#pragma once

#include <string>
#include <vector>

#include "secgames/errors.hpp"

namespace secgames {

enum class NetworkMetric { shortest_path_length, max_flow_value };

struct NetworkEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
  double capacity = 0.0;
};

// Directed interdiction instance. Undirected inputs are expanded into two
// directed edges at ingestion (each direction independently attackable).
struct NetworkInstance {
  std::vector<std::string> nodes;
  std::vector<NetworkEdge> edges;
  std::size_t source = 0;
  std::size_t sink = 0;
  NetworkMetric metric = NetworkMetric::shortest_path_length;
  int attacker_budget = 0;
  int defender_budget = 0;

  NetworkInstance(std::vector<std::string> nodes, std::vector<NetworkEdge> edges,
                  std::size_t source, std::size_t sink, NetworkMetric metric,
                  int attacker_budget, int defender_budget);

  // Label-based construction; unknown labels raise InvalidInputError.
  static NetworkInstance from_labels(
      std::vector<std::string> nodes,
      const std::vector<std::tuple<std::string, std::string, double, double>>& edges,
      const std::string& source, const std::string& sink, NetworkMetric metric,
      int attacker_budget, int defender_budget);

  // Large finite stand-in for "disconnected" used in comparisons:
  // sum of all edge weights plus one.
  double disconnection_sentinel() const;
};

struct MetricResult {
  double value = 0.0;        // +infinity marks a disconnected shortest path
  bool disconnected = false;
};

// Metric on the residual graph after deleting `removed_edges` (edge
// indices). Shortest path is the weighted s-t distance; max flow is the
// s-t value over remaining capacities.
MetricResult evaluate_metric(const NetworkInstance& instance,
                             const std::vector<std::size_t>& removed_edges);

struct InterdictionSolution {
  std::vector<std::size_t> defender_set;   // protected edges, |y| <= k_D
  std::vector<std::size_t> attacker_set;   // removed edges, disjoint from y
  double objective = 0.0;                  // metric value at the solution
  bool disconnected = false;
};

// Exhaustive bilevel enumeration of min_y max_x disruption. The attacker
// maximizes shortest-path length (disconnection counts as the sentinel) or
// minimizes max flow; protected edges cannot be removed. Candidate sets
// are scanned in (size, lexicographic) order and the first optimum is
// kept, so ties resolve to the smallest set.
InterdictionSolution solve_minmax_interdiction(const NetworkInstance& instance);

}  // namespace secgames
