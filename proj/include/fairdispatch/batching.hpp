#pragma once

#include <span>
#include <vector>

#include "fairdispatch/core.hpp"
#include "fairdispatch/routing.hpp"

namespace fd {

struct Batch {
  std::vector<Order> orders;  // sorted by id
  NodeId anchor_restaurant = 0;

  /// Smallest order id; used as the batch's identity for ordering and tie-breaks.
  OrderId id() const { return orders.front().id; }
};

struct BatchingParams {
  int max_batch_size = 2;
  Seconds max_batch_xdt = 600;
};

/// Route of an ideal agent serving a group of orders: it stands at the best
/// anchor restaurant when the last order of the group is placed.
struct IdealRoute {
  NodeId anchor = 0;
  Seconds start = 0;
  Seconds duration = 0;
  Seconds max_xdt = 0;
};

IdealRoute ideal_route(std::span<const Order> orders, const RoadNetwork& net);

/// Greedy savings-based grouping of pending orders into batches.
///
/// Every input order lands in exactly one batch. Pairs of groups are merged
/// best-savings-first while the merged group fits `max_batch_size` and keeps
/// every order's excess delivery time under `max_batch_xdt` for an ideal agent.
std::vector<Batch> batch_orders(std::span<const Order> orders, const RoadNetwork& net, Seconds now,
                                const BatchingParams& params);

}  // namespace fd
