#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "fairdispatch/batching.hpp"
#include "support.hpp"

using namespace fd;
using namespace fdtest;

namespace {

// Largest excess delivery time of an ideal agent standing at `anchor` when
// the last order is placed, planned by exhaustive interleaving.
Seconds oracle_max_xdt(const std::vector<Order>& orders, NodeId anchor, const RoadNetwork& net) {
  Seconds start = 0;
  for (const auto& o : orders) start = std::max(start, o.placed_at);
  CourierState ideal{anchor, start, static_cast<int>(orders.size()), {}, {}};
  const auto best = brute_plan(ideal, orders, net, start);
  Seconds worst = 0;
  for (const auto& o : orders) worst = std::max(worst, best.drops.at(o.id) - o.placed_at - sdt(o, net));
  return worst;
}

std::multiset<OrderId> ids_of(const std::vector<Batch>& batches) {
  std::multiset<OrderId> ids;
  for (const auto& b : batches)
    for (const auto& o : b.orders) ids.insert(o.id);
  return ids;
}

}  // namespace

TEST_CASE("single order gives one singleton batch") {
  auto net = grid(3, 3);
  const std::vector<Order> orders{{7, 0, 0, 8, 300}};
  auto batches = batch_orders(orders, *net, 0, {});
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].orders.size() == 1);
  CHECK(batches[0].id() == 7);
  CHECK(batches[0].anchor_restaurant == 0);
  CHECK(batch_orders(std::vector<Order>{}, *net, 0, {}).empty());
}

TEST_CASE("same restaurant, nearby customers are batched") {
  auto net = grid(1, 20, 100, 6);  // 100 m per edge
  const std::vector<Order> orders{{1, 0, 0, 10, 300}, {2, 30, 0, 12, 300}};  // customers 200 m apart
  CHECK(oracle_max_xdt(orders, 0, *net) <= 600);
  auto batches = batch_orders(orders, *net, 60, {});
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].orders.size() == 2);
  CHECK(batches[0].anchor_restaurant == 0);
  CHECK(batches[0].id() == 1);
}

TEST_CASE("restaurants 10 km apart stay separate") {
  auto net = grid(1, 51, 200, 6);  // 10 km end to end
  const std::vector<Order> orders{{1, 0, 0, 1, 300}, {2, 0, 50, 49, 300}};
  CHECK(oracle_max_xdt(orders, 0, *net) > 600);
  CHECK(oracle_max_xdt(orders, 50, *net) > 600);
  auto batches = batch_orders(orders, *net, 0, {});
  CHECK(batches.size() == 2);
}

TEST_CASE("batching is a partition that honours size and excess-time bounds") {
  auto net = grid(5, 5, 200, 6);
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<NodeId> node(0, 24);
  std::uniform_int_distribution<Seconds> placed(0, 300), prep(60, 600);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Order> orders;
    for (OrderId id = 1; id <= 12; ++id) {
      NodeId r = node(rng) % 5, c = node(rng);  // restaurants concentrated on the first row
      if (c == r) c = 24;
      orders.push_back({id * 3, placed(rng), r, c, prep(rng)});
    }
    for (int max_size : {1, 2, 3}) {
      BatchingParams p{max_size, 600};
      auto batches = batch_orders(orders, *net, 400, p);
      std::multiset<OrderId> want;
      for (const auto& o : orders) want.insert(o.id);
      CHECK(ids_of(batches) == want);
      for (const auto& b : batches) {
        CHECK(static_cast<int>(b.orders.size()) <= max_size);
        CHECK(std::is_sorted(b.orders.begin(), b.orders.end(), [](auto& x, auto& y) { return x.id < y.id; }));
        if (b.orders.size() > 1) CHECK(oracle_max_xdt(b.orders, b.anchor_restaurant, *net) <= 600);
      }
      if (max_size == 1) CHECK(batches.size() == orders.size());
    }
  }
}

TEST_CASE("batching depends only on the set of orders") {
  auto net = grid(4, 4, 200, 6);
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<NodeId> node(0, 15);
  std::vector<Order> orders;
  for (OrderId id = 1; id <= 10; ++id) {
    NodeId r = node(rng) % 4, c = node(rng);
    if (c == r) c = 15;
    orders.push_back({id, 10 * id, r, c, 300});
  }
  const auto a = batch_orders(orders, *net, 200, {});
  std::shuffle(orders.begin(), orders.end(), rng);
  const auto b = batch_orders(orders, *net, 200, {});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id() == b[i].id());
    CHECK(a[i].orders.size() == b[i].orders.size());
    CHECK(a[i].anchor_restaurant == b[i].anchor_restaurant);
  }
}

TEST_CASE("ideal route of a single order has no excess time") {
  auto net = grid(3, 3, 200, 6);
  const std::vector<Order> one{{1, 100, 2, 6, 300}};
  const auto r = ideal_route(one, *net);
  CHECK(r.anchor == 2);
  CHECK(r.start == 100);
  CHECK(r.max_xdt == 0);
  CHECK(r.duration == sdt(one[0], *net));
  CHECK_THROWS_AS(ideal_route(std::vector<Order>{}, *net), ContractError);
}

TEST_CASE("duplicate ids and bad parameters are rejected") {
  auto net = grid(2, 2);
  const std::vector<Order> dup{{1, 0, 0, 3, 0}, {1, 0, 1, 2, 0}};
  CHECK_THROWS_AS(batch_orders(dup, *net, 0, {}), ContractError);
  CHECK_THROWS_AS(batch_orders(std::vector<Order>{{1, 0, 0, 3, 0}}, *net, 0, BatchingParams{0, 600}), ConfigError);
}
