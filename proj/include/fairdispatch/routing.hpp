#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairdispatch/core.hpp"

namespace fd {

/// Thrown when no path exists between two nodes.
class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(NodeId src, NodeId dst);
  NodeId src;
  NodeId dst;
};

struct NodeRecord {
  NodeId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const NodeRecord&) const = default;
};

struct EdgeRecord {
  NodeId src = 0;
  NodeId dst = 0;
  double length_m = 0.0;
  std::vector<double> speeds;  // m/s, one per time bucket
  bool operator==(const EdgeRecord&) const = default;
};

/// Directed road graph with time-bucketed edge speeds.
///
/// Queries freeze the speed bucket at the departure time and run Dijkstra on
/// integer-second edge times. Shortest-path rows are cached per
/// (bucket, source); the cache is guarded so a network can be shared across
/// threads once built.
class RoadNetwork {
 public:
  RoadNetwork(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges, int bucket_count = 24);

  RoadNetwork(const RoadNetwork&) = delete;
  RoadNetwork& operator=(const RoadNetwork&) = delete;
  RoadNetwork(RoadNetwork&&) = delete;

  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  int bucket_count() const { return bucket_count_; }

  bool has_node(NodeId id) const { return index_.contains(id); }
  const NodeRecord& node(NodeId id) const;

  /// True when the node lies in the largest strongly connected component.
  bool serviced(NodeId id) const;

  int bucket_of(Seconds t) const;

  Seconds travel_time(NodeId src, NodeId dst, Seconds depart) const;
  /// Length in meters of the path chosen by travel_time.
  double travel_distance(NodeId src, NodeId dst, Seconds depart) const;

  /// Integer traversal time of one edge in a bucket.
  static Seconds edge_seconds(double length_m, double speed);

 private:
  struct Arc {
    std::int32_t to;
    std::int32_t edge;
  };
  struct Row {
    std::vector<std::int64_t> time;
    std::vector<double> dist;
  };

  std::size_t index_of(NodeId id) const;
  const Row& row(int speed_class, std::size_t src) const;
  void compute_components();

  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  int bucket_count_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<Arc>> out_;
  // Buckets with identical speed columns share one class.
  std::vector<int> bucket_class_;
  std::vector<std::vector<Seconds>> class_edge_time_;
  std::vector<char> serviced_;

  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::uint64_t, std::unique_ptr<Row>> cache_;
};

enum class StopKind : std::uint8_t { kPickup, kDrop };

struct Stop {
  NodeId node = 0;
  StopKind kind = StopKind::kPickup;
  OrderId order = 0;
  Seconds arrival = 0;
  Seconds departure = 0;  // arrival, or food-ready time for a pickup that waits
  double leg_distance_m = 0.0;
  bool operator==(const Stop&) const = default;
};

/// An agent's planned stop sequence starting from (start_node, start_time).
struct RoutePlan {
  NodeId start_node = 0;
  Seconds start_time = 0;
  std::vector<Stop> stops;

  Seconds completion_time() const { return stops.empty() ? start_time : stops.back().departure; }
  /// Drop time of the given order, or -1 if absent.
  Seconds drop_time(OrderId order) const;
  bool operator==(const RoutePlan&) const = default;
};

/// What route planning needs to know about an agent: where it becomes free
/// to re-plan, and the orders it still owes.
struct CourierState {
  NodeId node = 0;
  Seconds free_at = 0;
  int capacity = 1;
  std::vector<Order> onboard;   // picked up, awaiting drop
  std::vector<Order> assigned;  // awaiting pickup

  int load() const { return static_cast<int>(onboard.size() + assigned.size()); }
  bool idle() const { return onboard.empty() && assigned.empty(); }
};

inline constexpr int kMaxPlannedOrders = 5;

/// Minimum-completion-time interleaving of the courier's outstanding stops
/// and the extra orders (ties: smaller sum of drop times, then enumeration order).
RoutePlan plan_route(const CourierState& courier, std::span<const Order> extra, const RoadNetwork& net, Seconds now);

/// Prep time plus shortest restaurant-to-customer travel time.
Seconds sdt(const Order& order, const RoadNetwork& net);

/// Delivery time of `order` if appended to the courier's route now.
Seconds edt(const Order& order, const CourierState& courier, const RoadNetwork& net, Seconds now);

/// EDT minus SDT, floored at zero.
Seconds xdt(const Order& order, const CourierState& courier, const RoadNetwork& net, Seconds now);

/// Increase in route completion time caused by adding the batch.
Seconds extra_work(const CourierState& courier, std::span<const Order> batch, const RoadNetwork& net, Seconds now);

}  // namespace fd
