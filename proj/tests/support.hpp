#pragma once

// Test helpers and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "fairdispatch/engine.hpp"
#include "fairdispatch/matching.hpp"
#include "fairdispatch/routing.hpp"

namespace fdtest {

using namespace fd;

inline std::shared_ptr<const RoadNetwork> make_network(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges,
                                                       int buckets = 24) {
  return std::make_shared<const RoadNetwork>(std::move(nodes), std::move(edges), buckets);
}

/// Bidirectional grid; node id r*cols + c, all edges `spacing` meters at `speed`.
inline std::shared_ptr<const RoadNetwork> grid(int rows, int cols, double spacing = 100.0, double speed = 10.0) {
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) nodes.push_back({r * cols + c, 28.5 + r * 0.001, 77.1 + c * 0.001});
  auto link = [&](int a, int b) {
    edges.push_back({a, b, spacing, std::vector<double>(24, speed)});
    edges.push_back({b, a, spacing, std::vector<double>(24, speed)});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) link(r * cols + c, r * cols + c + 1);
      if (r + 1 < rows) link(r * cols + c, (r + 1) * cols + c);
    }
  return make_network(std::move(nodes), std::move(edges));
}

/// Edge traversal seconds, restated independently of the library.
inline Seconds oracle_edge_seconds(double length, double speed) {
  return std::max<Seconds>(1, static_cast<Seconds>(std::llround(length / speed)));
}

/// Minimum travel time over all simple paths, enumerated by DFS. -1 if none.
inline Seconds brute_shortest(const std::vector<EdgeRecord>& edges, NodeId src, NodeId dst, int bucket) {
  if (src == dst) return 0;
  Seconds best = -1;
  std::vector<NodeId> path{src};
  std::function<void(NodeId, Seconds)> dfs = [&](NodeId at, Seconds t) {
    if (at == dst) {
      if (best < 0 || t < best) best = t;
      return;
    }
    for (const auto& e : edges) {
      if (e.src != at || std::find(path.begin(), path.end(), e.dst) != path.end()) continue;
      path.push_back(e.dst);
      dfs(e.dst, t + oracle_edge_seconds(e.length_m, e.speeds[bucket]));
      path.pop_back();
    }
  };
  dfs(src, 0);
  return best;
}

struct BrutePlan {
  Seconds completion = std::numeric_limits<Seconds>::max();
  Seconds drop_sum = std::numeric_limits<Seconds>::max();
  std::map<OrderId, Seconds> drops;
};

/// Tries every stop order respecting pickup-before-drop and capacity, and
/// keeps the lexicographic minimum of (completion, sum of drop times).
inline BrutePlan brute_plan(const CourierState& c, const std::vector<Order>& extra, const RoadNetwork& net,
                            Seconds now) {
  struct S {
    NodeId node;
    bool pickup;
    Order o;
  };
  std::vector<S> stops;
  for (const auto& o : c.onboard) stops.push_back({o.customer_node, false, o});
  std::vector<Order> to_pick = c.assigned;
  to_pick.insert(to_pick.end(), extra.begin(), extra.end());
  for (const auto& o : to_pick) {
    stops.push_back({o.restaurant_node, true, o});
    stops.push_back({o.customer_node, false, o});
  }
  std::vector<int> idx(stops.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  BrutePlan best;
  do {
    std::map<OrderId, bool> picked;
    for (const auto& o : c.onboard) picked[o.id] = true;
    int load = static_cast<int>(c.onboard.size());
    NodeId at = c.node;
    Seconds t = std::max(now, c.free_at);
    bool ok = true;
    Seconds drop_sum = 0;
    std::map<OrderId, Seconds> drops;
    for (int i : idx) {
      const auto& s = stops[i];
      if (!s.pickup && !picked[s.o.id]) {
        ok = false;
        break;
      }
      t += net.travel_time(at, s.node, t);
      at = s.node;
      if (s.pickup) {
        if (++load > c.capacity) {
          ok = false;
          break;
        }
        t = std::max(t, s.o.ready_at());
        picked[s.o.id] = true;
      } else {
        --load;
        drop_sum += t;
        drops[s.o.id] = t;
      }
    }
    if (!ok) continue;
    if (t < best.completion || (t == best.completion && drop_sum < best.drop_sum)) {
      best.completion = t;
      best.drop_sum = drop_sum;
      best.drops = drops;
    }
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

struct BruteMatch {
  std::size_t cardinality = 0;
  double weight = 0.0;
};

/// Maximum cardinality over feasible edges, then minimum weight, by
/// enumerating every partial injection of rows into columns.
inline BruteMatch brute_assignment(const CostMatrix& m) {
  BruteMatch best;
  bool have = false;
  std::vector<char> used(m.cols(), 0);
  std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t r, std::size_t card, double w) {
    if (r == m.rows()) {
      if (!have || card > best.cardinality || (card == best.cardinality && w < best.weight)) {
        best = {card, w};
        have = true;
      }
      return;
    }
    rec(r + 1, card, w);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (used[c] || !m.feasible(r, c)) continue;
      used[c] = 1;
      rec(r + 1, card + 1, w + m.at(r, c));
      used[c] = 0;
    }
  };
  rec(0, 0, 0.0);
  return best;
}

/// Platform cost rebuilt from the raw event log alone: login events carry
/// the guarantee ratio and the session span, work events the busy spans.
inline double cost_from_events(const SimReport& r) {
  std::map<AgentId, double> ratio, active_s, work_s;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::kLogin) {
      ratio[e.agent] = e.value;
      active_s[e.agent] = static_cast<double>(e.end - e.time);
    } else if (e.kind == EventKind::kWork) {
      work_s[e.agent] += static_cast<double>(e.end - e.time);
    }
  }
  const double p = r.cost.pay_rate;
  double cost = 0.0;
  for (const auto& [agent, a] : active_s) {
    const double w = work_s[agent];
    cost += p * w / 3600.0 + p * std::max(0.0, ratio[agent] * a - w) / 3600.0;
  }
  return cost;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace fdtest
