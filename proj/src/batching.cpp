#include "fairdispatch/batching.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace fd {

IdealRoute ideal_route(std::span<const Order> orders, const RoadNetwork& net) {
  if (orders.empty()) throw ContractError("ideal_route: empty order group");
  Seconds start = 0;
  std::set<NodeId> anchors;
  for (const auto& o : orders) {
    start = std::max(start, o.placed_at);
    anchors.insert(o.restaurant_node);
  }
  std::optional<IdealRoute> best;
  for (NodeId anchor : anchors) {
    CourierState ideal{anchor, start, static_cast<int>(orders.size()), {}, {}};
    const auto plan = plan_route(ideal, orders, net, start);
    IdealRoute r{anchor, start, plan.completion_time() - start, 0};
    for (const auto& o : orders) {
      r.max_xdt = std::max(r.max_xdt, plan.drop_time(o.id) - o.placed_at - sdt(o, net));
    }
    if (!best || r.duration < best->duration || (r.duration == best->duration && r.max_xdt < best->max_xdt)) best = r;
  }
  return *best;
}

namespace {

struct Group {
  std::vector<Order> orders;
  NodeId anchor;
  Seconds solo_time;  // sum of members' separate route durations
  bool alive = true;
};

struct Merge {
  Seconds savings;
  std::size_t a;
  std::size_t b;
  NodeId anchor;
};

std::optional<Merge> score(const Group& a, const Group& b, std::size_t ia, std::size_t ib, const RoadNetwork& net,
                           const BatchingParams& params) {
  if (a.orders.size() + b.orders.size() > static_cast<std::size_t>(params.max_batch_size)) return std::nullopt;
  std::vector<Order> merged = a.orders;
  merged.insert(merged.end(), b.orders.begin(), b.orders.end());
  const auto route = ideal_route(merged, net);
  if (route.max_xdt > params.max_batch_xdt) return std::nullopt;
  const Seconds savings = a.solo_time + b.solo_time - route.duration;
  if (savings <= 0) return std::nullopt;
  return Merge{savings, ia, ib, route.anchor};
}

}  // namespace

std::vector<Batch> batch_orders(std::span<const Order> orders, const RoadNetwork& net, Seconds /*now*/,
                                const BatchingParams& params) {
  if (params.max_batch_size < 1) throw ConfigError("max_batch_size must be at least 1");
  std::vector<Order> sorted(orders.begin(), orders.end());
  std::sort(sorted.begin(), sorted.end(), [](const Order& x, const Order& y) { return x.id < y.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) throw ContractError("batch_orders: duplicate order id " + std::to_string(sorted[i].id));
  }

  std::vector<Group> groups;
  groups.reserve(sorted.size() * 2);
  for (const auto& o : sorted) groups.push_back({{o}, o.restaurant_node, sdt(o, net)});

  if (params.max_batch_size > 1) {
    std::vector<Merge> candidates;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j)
        if (auto m = score(groups[i], groups[j], i, j, net, params)) candidates.push_back(*m);

    auto better = [&](const Merge& x, const Merge& y) {
      if (x.savings != y.savings) return x.savings > y.savings;
      const auto kx = std::make_pair(groups[x.a].orders.front().id, groups[x.b].orders.front().id);
      const auto ky = std::make_pair(groups[y.a].orders.front().id, groups[y.b].orders.front().id);
      return kx < ky;
    };
    while (true) {
      std::erase_if(candidates, [&](const Merge& m) { return !groups[m.a].alive || !groups[m.b].alive; });
      if (candidates.empty()) break;
      const Merge best = *std::min_element(candidates.begin(), candidates.end(), better);
      Group merged;
      merged.orders = groups[best.a].orders;
      merged.orders.insert(merged.orders.end(), groups[best.b].orders.begin(), groups[best.b].orders.end());
      std::sort(merged.orders.begin(), merged.orders.end(), [](const Order& x, const Order& y) { return x.id < y.id; });
      merged.anchor = best.anchor;
      merged.solo_time = groups[best.a].solo_time + groups[best.b].solo_time;
      groups[best.a].alive = false;
      groups[best.b].alive = false;
      groups.push_back(std::move(merged));
      const std::size_t k = groups.size() - 1;
      for (std::size_t i = 0; i < k; ++i) {
        if (!groups[i].alive) continue;
        auto [lo, hi] = groups[i].orders.front().id < groups[k].orders.front().id ? std::pair{i, k} : std::pair{k, i};
        if (auto m = score(groups[lo], groups[hi], lo, hi, net, params)) candidates.push_back(*m);
      }
    }
  }

  std::vector<Batch> out;
  for (auto& g : groups) {
    if (g.alive) out.push_back({std::move(g.orders), g.anchor});
  }
  std::sort(out.begin(), out.end(), [](const Batch& x, const Batch& y) { return x.id() < y.id(); });
  return out;
}

}  // namespace fd
