#include "fairdispatch/routing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace fd {

UnreachableError::UnreachableError(NodeId s, NodeId d)
    : std::runtime_error("no path from node " + std::to_string(s) + " to node " + std::to_string(d)), src(s), dst(d) {}

namespace {
constexpr std::int64_t kInfTime = std::numeric_limits<std::int64_t>::max() / 4;
}

Seconds RoadNetwork::edge_seconds(double length_m, double speed) {
  return std::max<Seconds>(1, std::llround(length_m / speed));
}

RoadNetwork::RoadNetwork(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges, int bucket_count)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), bucket_count_(bucket_count) {
  if (bucket_count_ <= 0 || kSecondsPerDay % bucket_count_ != 0) {
    throw DataError("bucket_count must be a positive divisor of 86400, got " + std::to_string(bucket_count_));
  }
  if (nodes_.empty()) throw DataError("road network has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw DataError("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  out_.resize(nodes_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (!has_node(ed.src) || !has_node(ed.dst)) {
      throw DataError("edge " + std::to_string(e) + " references unknown node");
    }
    if (!(ed.length_m >= 0.0) || !std::isfinite(ed.length_m)) {
      throw DataError("edge " + std::to_string(e) + " has invalid length");
    }
    if (static_cast<int>(ed.speeds.size()) != bucket_count_) {
      throw DataError("edge " + std::to_string(e) + " has " + std::to_string(ed.speeds.size()) +
                      " speed buckets, expected " + std::to_string(bucket_count_));
    }
    for (double s : ed.speeds) {
      if (!(s > 0.0) || !std::isfinite(s)) throw DataError("edge " + std::to_string(e) + " has nonpositive speed");
    }
    out_[index_.at(ed.src)].push_back({static_cast<std::int32_t>(index_.at(ed.dst)), static_cast<std::int32_t>(e)});
  }

  bucket_class_.assign(bucket_count_, -1);
  std::vector<int> representative;
  for (int b = 0; b < bucket_count_; ++b) {
    for (std::size_t c = 0; c < representative.size(); ++c) {
      const int rb = representative[c];
      const bool same = std::all_of(edges_.begin(), edges_.end(),
                                    [&](const EdgeRecord& ed) { return ed.speeds[b] == ed.speeds[rb]; });
      if (same) {
        bucket_class_[b] = static_cast<int>(c);
        break;
      }
    }
    if (bucket_class_[b] < 0) {
      bucket_class_[b] = static_cast<int>(representative.size());
      representative.push_back(b);
      std::vector<Seconds> times(edges_.size());
      for (std::size_t e = 0; e < edges_.size(); ++e) times[e] = edge_seconds(edges_[e].length_m, edges_[e].speeds[b]);
      class_edge_time_.push_back(std::move(times));
    }
  }
  compute_components();
}

void RoadNetwork::compute_components() {
  // Kosaraju: order by finish time on the forward graph, sweep the reverse graph.
  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::int32_t>> rev(n);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& a : out_[u]) rev[a.to].push_back(static_cast<std::int32_t>(u));

  std::vector<char> seen(n, 0);
  std::vector<std::int32_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{static_cast<std::int32_t>(s), 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < out_[u].size()) {
        const auto v = out_[u][i++].to;
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::size_t> comp_size;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    const auto c = static_cast<std::int32_t>(comp_size.size());
    comp_size.push_back(0);
    std::vector<std::int32_t> stack{*it};
    comp[*it] = c;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      ++comp_size[c];
      for (auto v : rev[u]) {
        if (comp[v] < 0) {
          comp[v] = c;
          stack.push_back(v);
        }
      }
    }
  }
  const auto biggest = static_cast<std::int32_t>(
      std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
  serviced_.resize(n);
  for (std::size_t u = 0; u < n; ++u) serviced_[u] = comp[u] == biggest;
}

std::size_t RoadNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ContractError("unknown node id " + std::to_string(id));
  return it->second;
}

const NodeRecord& RoadNetwork::node(NodeId id) const { return nodes_[index_of(id)]; }

bool RoadNetwork::serviced(NodeId id) const {
  auto it = index_.find(id);
  return it != index_.end() && serviced_[it->second];
}

int RoadNetwork::bucket_of(Seconds t) const {
  Seconds tod = t % kSecondsPerDay;
  if (tod < 0) tod += kSecondsPerDay;
  return static_cast<int>(tod / (kSecondsPerDay / bucket_count_));
}

const RoadNetwork::Row& RoadNetwork::row(int speed_class, std::size_t src) const {
  const std::uint64_t key = (static_cast<std::uint64_t>(speed_class) << 32) | src;
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return *it->second;
  }
  const auto& et = class_edge_time_[speed_class];
  auto r = std::make_unique<Row>();
  r->time.assign(nodes_.size(), kInfTime);
  r->dist.assign(nodes_.size(), std::numeric_limits<double>::infinity());
  using Label = std::tuple<std::int64_t, double, std::int32_t>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  r->time[src] = 0;
  r->dist[src] = 0.0;
  heap.emplace(0, 0.0, static_cast<std::int32_t>(src));
  while (!heap.empty()) {
    auto [t, d, u] = heap.top();
    heap.pop();
    if (t != r->time[u] || d != r->dist[u]) continue;
    for (const auto& a : out_[u]) {
      const std::int64_t nt = t + et[a.edge];
      const double nd = d + edges_[a.edge].length_m;
      if (nt < r->time[a.to] || (nt == r->time[a.to] && nd < r->dist[a.to])) {
        r->time[a.to] = nt;
        r->dist[a.to] = nd;
        heap.emplace(nt, nd, a.to);
      }
    }
  }
  std::lock_guard lock(cache_mu_);
  auto [it, inserted] = cache_.emplace(key, std::move(r));
  return *it->second;
}

Seconds RoadNetwork::travel_time(NodeId src, NodeId dst, Seconds depart) const {
  if (src == dst) return 0;
  const auto s = index_of(src);
  const auto d = index_of(dst);
  const auto t = row(bucket_class_[bucket_of(depart)], s).time[d];
  if (t >= kInfTime) throw UnreachableError(src, dst);
  return t;
}

double RoadNetwork::travel_distance(NodeId src, NodeId dst, Seconds depart) const {
  if (src == dst) return 0.0;
  const auto s = index_of(src);
  const auto d = index_of(dst);
  const auto& r = row(bucket_class_[bucket_of(depart)], s);
  if (r.time[d] >= kInfTime) throw UnreachableError(src, dst);
  return r.dist[d];
}

Seconds RoutePlan::drop_time(OrderId order) const {
  for (const auto& s : stops)
    if (s.kind == StopKind::kDrop && s.order == order) return s.departure;
  return -1;
}

namespace {

struct PendingStop {
  NodeId node;
  StopKind kind;
  OrderId order;
  Seconds ready_at;
  int depends_on;  // index of the pickup that must precede, or -1
};

class RouteSearch {
 public:
  RouteSearch(std::vector<PendingStop> stops, const RoadNetwork& net, int capacity)
      : stops_(std::move(stops)), net_(net), capacity_(capacity), done_(stops_.size(), 0) {}

  void run(NodeId node, Seconds time, int load) {
    current_.reserve(stops_.size());
    dfs(node, time, load, 0);
  }

  bool found() const { return found_; }
  const std::vector<Stop>& best() const { return best_; }

 private:
  void dfs(NodeId node, Seconds time, int load, Seconds drop_sum) {
    if (found_ && (time > best_completion_ || (time == best_completion_ && drop_sum >= best_drop_sum_))) return;
    if (current_.size() == stops_.size()) {
      best_ = current_;
      best_completion_ = time;
      best_drop_sum_ = drop_sum;
      found_ = true;
      return;
    }
    for (std::size_t i = 0; i < stops_.size(); ++i) {
      if (done_[i]) continue;
      const auto& ps = stops_[i];
      if (ps.depends_on >= 0 && !done_[ps.depends_on]) continue;
      const int next_load = load + (ps.kind == StopKind::kPickup ? 1 : -1);
      if (next_load > capacity_) continue;
      const Seconds arrive = time + net_.travel_time(node, ps.node, time);
      const Seconds leave = ps.kind == StopKind::kPickup ? std::max(arrive, ps.ready_at) : arrive;
      done_[i] = 1;
      current_.push_back({ps.node, ps.kind, ps.order, arrive, leave, net_.travel_distance(node, ps.node, time)});
      dfs(ps.node, leave, next_load, drop_sum + (ps.kind == StopKind::kDrop ? leave : 0));
      current_.pop_back();
      done_[i] = 0;
    }
  }

  std::vector<PendingStop> stops_;
  const RoadNetwork& net_;
  int capacity_;
  std::vector<char> done_;
  std::vector<Stop> current_;
  std::vector<Stop> best_;
  Seconds best_completion_ = 0;
  Seconds best_drop_sum_ = 0;
  bool found_ = false;
};

}  // namespace

RoutePlan plan_route(const CourierState& courier, std::span<const Order> extra, const RoadNetwork& net, Seconds now) {
  const int total = courier.load() + static_cast<int>(extra.size());
  if (total > courier.capacity) {
    throw ContractError("plan_route: " + std::to_string(total) + " orders exceed capacity " +
                        std::to_string(courier.capacity));
  }
  if (total > kMaxPlannedOrders) {
    throw ContractError("plan_route: exhaustive planning is capped at " + std::to_string(kMaxPlannedOrders) + " orders");
  }
  std::vector<PendingStop> stops;
  for (const auto& o : courier.onboard) stops.push_back({o.customer_node, StopKind::kDrop, o.id, 0, -1});
  auto add_pair = [&](const Order& o) {
    const int pick = static_cast<int>(stops.size());
    stops.push_back({o.restaurant_node, StopKind::kPickup, o.id, o.ready_at(), -1});
    stops.push_back({o.customer_node, StopKind::kDrop, o.id, 0, pick});
  };
  for (const auto& o : courier.assigned) add_pair(o);
  for (const auto& o : extra) add_pair(o);

  RoutePlan plan;
  plan.start_node = courier.node;
  plan.start_time = std::max(now, courier.free_at);
  if (stops.empty()) return plan;

  RouteSearch search(std::move(stops), net, courier.capacity);
  search.run(plan.start_node, plan.start_time, static_cast<int>(courier.onboard.size()));
  if (!search.found()) throw ContractError("plan_route: no feasible stop order under capacity");
  plan.stops = search.best();
  return plan;
}

Seconds sdt(const Order& order, const RoadNetwork& net) {
  return order.prep_time + net.travel_time(order.restaurant_node, order.customer_node, order.placed_at);
}

Seconds edt(const Order& order, const CourierState& courier, const RoadNetwork& net, Seconds now) {
  const Order single[] = {order};
  const auto plan = plan_route(courier, single, net, now);
  return plan.drop_time(order.id) - order.placed_at;
}

Seconds xdt(const Order& order, const CourierState& courier, const RoadNetwork& net, Seconds now) {
  return std::max<Seconds>(0, edt(order, courier, net, now) - sdt(order, net));
}

Seconds extra_work(const CourierState& courier, std::span<const Order> batch, const RoadNetwork& net, Seconds now) {
  if (batch.empty()) return 0;
  const auto without = plan_route(courier, {}, net, now).completion_time();
  const auto with = plan_route(courier, batch, net, now).completion_time();
  return std::max<Seconds>(0, with - without);
}

}  // namespace fd
