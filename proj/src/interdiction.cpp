#include "secgames/interdiction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace secgames {

namespace {
constexpr double kEnumerationBound = 1e7;
}

NetworkInstance::NetworkInstance(std::vector<std::string> nodes_in,
                                 std::vector<NetworkEdge> edges_in, std::size_t source_in,
                                 std::size_t sink_in, NetworkMetric metric_in,
                                 int attacker_budget_in, int defender_budget_in)
    : nodes(std::move(nodes_in)),
      edges(std::move(edges_in)),
      source(source_in),
      sink(sink_in),
      metric(metric_in),
      attacker_budget(attacker_budget_in),
      defender_budget(defender_budget_in) {
  if (nodes.empty()) throw InvalidInputError("network needs nodes");
  if (source >= nodes.size() || sink >= nodes.size())
    throw InvalidInputError("source/sink index out of range");
  if (source == sink) throw InvalidInputError("source and sink must differ");
  for (const auto& e : edges) {
    if (e.from >= nodes.size() || e.to >= nodes.size())
      throw InvalidInputError("edge endpoint out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
      throw InvalidInputError("edge weights must be finite and nonnegative");
    if (!(e.capacity >= 0.0) || !std::isfinite(e.capacity))
      throw InvalidInputError("edge capacities must be finite and nonnegative");
  }
  if (attacker_budget < 0 || defender_budget < 0)
    throw InvalidInputError("budgets must be nonnegative");
  if (static_cast<std::size_t>(attacker_budget) > edges.size() ||
      static_cast<std::size_t>(defender_budget) > edges.size())
    throw InvalidInputError("budgets must not exceed the edge count");
}

NetworkInstance NetworkInstance::from_labels(
    std::vector<std::string> nodes,
    const std::vector<std::tuple<std::string, std::string, double, double>>& edges,
    const std::string& source, const std::string& sink, NetworkMetric metric,
    int attacker_budget, int defender_budget) {
  auto index_of = [&nodes](const std::string& label) -> std::size_t {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == label) return i;
    throw InvalidInputError("unknown node label '" + label + "'");
  };
  std::vector<NetworkEdge> resolved;
  resolved.reserve(edges.size());
  for (const auto& [from, to, weight, capacity] : edges)
    resolved.push_back({index_of(from), index_of(to), weight, capacity});
  const std::size_t s = index_of(source), t = index_of(sink);
  return NetworkInstance(std::move(nodes), std::move(resolved), s, t, metric,
                         attacker_budget, defender_budget);
}

double NetworkInstance::disconnection_sentinel() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.weight;
  return total + 1.0;
}

namespace {

MetricResult shortest_path(const NetworkInstance& g, const std::vector<bool>& removed) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.nodes.size(), inf);
  dist[g.source] = 0.0;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.push({0.0, g.source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (removed[e] || g.edges[e].from != u) continue;
      const double nd = d + g.edges[e].weight;
      if (nd < dist[g.edges[e].to]) {
        dist[g.edges[e].to] = nd;
        heap.push({nd, g.edges[e].to});
      }
    }
  }
  if (dist[g.sink] == inf) return {inf, true};
  return {dist[g.sink], false};
}

MetricResult max_flow(const NetworkInstance& g, const std::vector<bool>& removed) {
  const std::size_t n = g.nodes.size();
  // Edmonds-Karp over a dense capacity matrix; parallel edges merge.
  std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!removed[e]) cap[g.edges[e].from][g.edges[e].to] += g.edges[e].capacity;

  double flow = 0.0;
  while (true) {
    std::vector<std::size_t> parent(n, n);
    parent[g.source] = g.source;
    std::queue<std::size_t> bfs;
    bfs.push(g.source);
    while (!bfs.empty() && parent[g.sink] == n) {
      const std::size_t u = bfs.front();
      bfs.pop();
      for (std::size_t v = 0; v < n; ++v)
        if (parent[v] == n && cap[u][v] > 1e-12) {
          parent[v] = u;
          bfs.push(v);
        }
    }
    if (parent[g.sink] == n) break;
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t v = g.sink; v != g.source; v = parent[v])
      bottleneck = std::min(bottleneck, cap[parent[v]][v]);
    for (std::size_t v = g.sink; v != g.source; v = parent[v]) {
      cap[parent[v]][v] -= bottleneck;
      cap[v][parent[v]] += bottleneck;
    }
    flow += bottleneck;
  }
  return {flow, flow == 0.0};
}

double binomial_sum(std::size_t n, int max_k) {
  double total = 0.0;
  double c = 1.0;
  for (int k = 0; k <= max_k; ++k) {
    if (k > 0) c = c * static_cast<double>(n - static_cast<std::size_t>(k) + 1) /
                    static_cast<double>(k);
    total += c;
    if (static_cast<std::size_t>(k) >= n) break;
  }
  return total;
}

// Visits subsets of {0..n-1} \ forbidden with size <= max_k, in
// (size, lexicographic) order.
template <typename Fn>
void for_each_subset(std::size_t n, const std::vector<bool>& forbidden, int max_k, Fn fn) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i)
    if (!forbidden[i]) candidates.push_back(i);
  std::vector<std::size_t> subset;
  fn(subset);
  const int limit = std::min<int>(max_k, static_cast<int>(candidates.size()));
  for (int k = 1; k <= limit; ++k) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    while (true) {
      subset.clear();
      for (std::size_t i : idx) subset.push_back(candidates[i]);
      fn(subset);
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] ==
                           candidates.size() - static_cast<std::size_t>(k - i)) {
        --i;
      }
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

MetricResult evaluate_metric(const NetworkInstance& instance,
                             const std::vector<std::size_t>& removed_edges) {
  std::vector<bool> removed(instance.edges.size(), false);
  for (std::size_t e : removed_edges) {
    if (e >= instance.edges.size())
      throw InvalidInputError("removed edge index out of range");
    removed[e] = true;
  }
  return instance.metric == NetworkMetric::shortest_path_length
             ? shortest_path(instance, removed)
             : max_flow(instance, removed);
}

InterdictionSolution solve_minmax_interdiction(const NetworkInstance& instance) {
  const std::size_t m = instance.edges.size();
  const double combos = binomial_sum(m, instance.defender_budget) *
                        binomial_sum(m, instance.attacker_budget);
  if (combos > kEnumerationBound)
    throw UnsupportedSizeError(
        "bilevel enumeration would visit about " + std::to_string(combos) +
        " candidate pairs, above the supported bound of 1e7");

  const double sentinel = instance.disconnection_sentinel();
  const std::vector<bool> nothing_forbidden(m, false);

  // Disruption value the attacker maximizes: sentinel-capped path length,
  // or negated flow.
  auto disruption = [&](const std::vector<std::size_t>& removed) {
    const auto r = evaluate_metric(instance, removed);
    if (instance.metric == NetworkMetric::shortest_path_length)
      return r.disconnected ? sentinel : r.value;
    return -r.value;
  };

  bool have_best = false;
  InterdictionSolution best;
  double best_inner = 0.0;

  for_each_subset(m, nothing_forbidden, instance.defender_budget,
                  [&](const std::vector<std::size_t>& defender_set) {
    std::vector<bool> protected_mask(m, false);
    for (std::size_t e : defender_set) protected_mask[e] = true;

    bool have_inner = false;
    double inner_value = 0.0;
    std::vector<std::size_t> witness;
    for_each_subset(m, protected_mask, instance.attacker_budget,
                    [&](const std::vector<std::size_t>& attacker_set) {
      const double v = disruption(attacker_set);
      if (!have_inner || v > inner_value) {
        have_inner = true;
        inner_value = v;
        witness = attacker_set;
      }
    });

    if (!have_best || inner_value < best_inner) {
      have_best = true;
      best_inner = inner_value;
      best.defender_set = defender_set;
      best.attacker_set = witness;
    }
  });

  const auto realized = evaluate_metric(instance, best.attacker_set);
  best.objective = realized.value;
  best.disconnected = realized.disconnected;
  return best;
}

}  // namespace secgames
