#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fairdispatch/matching.hpp"
#include "support.hpp"

using namespace fd;
using namespace fdtest;

namespace {

CostMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double p_infeasible, int max_w) {
  CostMatrix m(r, c);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> w(0, max_w);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) = u(rng) < p_infeasible ? kInfeasible : w(rng);
  return m;
}

void check_valid(const CostMatrix& m, const Assignment& a) {
  std::set<std::size_t> rs, cs;
  for (auto [r, c] : a) {
    CHECK(m.feasible(r, c));
    CHECK(rs.insert(r).second);
    CHECK(cs.insert(c).second);
  }
  CHECK(std::is_sorted(a.begin(), a.end()));
}

Batch single(const Order& o) { return Batch{{o}, o.restaurant_node}; }

}  // namespace

TEST_CASE("guarantee weight cases") {
  CHECK(guarantee_weight(7200, 14400, 3600) == 0.0);
  CHECK(guarantee_weight(7200, 9000, 3600) == 1800.0);
  CHECK(guarantee_weight(7200, 3600, 3600) == 3600.0);
  CHECK(guarantee_weight(3600, 3600, 900) == 900.0);  // both branches agree at G = W
  CHECK(guarantee_weight(3600, 3600.000001, 900) == doctest::Approx(900.0));
  CHECK_THROWS_AS(guarantee_weight(-1, 0, 0), ContractError);
  CHECK_THROWS_AS(guarantee_weight(0, 0, -1), ContractError);
}

TEST_CASE("lowering work done never raises the guarantee weight") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 20000);
  for (int i = 0; i < 2000; ++i) {
    const double w = u(rng), g = u(rng), x = u(rng), d = u(rng);
    CHECK(guarantee_weight(std::max(0.0, w - d), g, x) <= guarantee_weight(w, g, x));
  }
}

TEST_CASE("small assignment cases") {
  CostMatrix one(1, 1, 5.0);
  CHECK(min_cost_assignment(one) == Assignment{{0, 0}});

  CostMatrix m(3, 3);
  const double w[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.at(i, j) = w[i][j];
  std::vector<int> perm{0, 1, 2};
  double best = 1e18;
  do {
    best = std::min(best, w[0][perm[0]] + w[1][perm[1]] + w[2][perm[2]]);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto a = min_cost_assignment(m);
  CHECK(a.size() == 3);
  CHECK(assignment_weight(m, a) == best);

  CostMatrix dead(2, 2, 1.0);
  dead.at(1, 0) = dead.at(1, 1) = kInfeasible;
  CHECK(min_cost_assignment(dead) == Assignment{{0, 0}});

  CHECK(min_cost_assignment(CostMatrix(0, 3)).empty());
  CHECK(min_cost_assignment(CostMatrix(3, 0)).empty());
  CHECK(min_cost_assignment(CostMatrix(2, 2)).empty());
}

TEST_CASE("cardinality beats weight") {
  // Cheapest single edge (0,0) would block row 1 from any match.
  CostMatrix m(2, 2);
  m.at(0, 0) = 0;
  m.at(0, 1) = 100;
  m.at(1, 0) = 100;
  CHECK(min_cost_assignment(m) == Assignment{{0, 1}, {1, 0}});
}

TEST_CASE("random matrices match brute-force enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 400; ++trial) {
    const auto r = dim(rng), c = dim(rng);
    const double p = (trial % 4) * 0.2;
    auto m = random_matrix(rng, r, c, p, trial % 2 ? 5 : 1000);
    const auto a = min_cost_assignment(m);
    const auto want = brute_assignment(m);
    check_valid(m, a);
    CHECK(a.size() == want.cardinality);
    CHECK(assignment_weight(m, a) == want.weight);
  }
}

TEST_CASE("row shifts and positive scaling keep the assignment when every row is matched") {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::uniform_int_distribution<int> shift(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = dim(rng);
    const auto c = r + dim(rng) - 1;
    auto m = random_matrix(rng, r, c, 0.0, 100);
    auto t = m;
    for (std::size_t i = 0; i < r; ++i) {
      const int s = shift(rng);
      for (std::size_t j = 0; j < c; ++j) t.at(i, j) = 2 * m.at(i, j) + s + 1000;
    }
    CHECK(min_cost_assignment(m) == min_cost_assignment(t));
  }
}

TEST_CASE("ties resolve deterministically") {
  CostMatrix m(2, 3, 1.0);
  const auto a = min_cost_assignment(m);
  CHECK(a == min_cost_assignment(m));
  CHECK(a.size() == 2);
  CostMatrix z(3, 3, 0.0);
  CHECK(min_cost_assignment(z) == min_cost_assignment(z));
}

TEST_CASE("big_m exceeds any all-finite assignment") {
  CostMatrix m(3, 2);
  m.at(0, 0) = 10;
  m.at(1, 1) = 4;
  CHECK(m.big_m() == 4 * 10 + 1);
  CHECK(m.surrogate(0, 0) == 10);
  CHECK(m.surrogate(2, 1) == m.big_m());

  // Brute force with the surrogate never prefers an infeasible edge when a
  // feasible perfect matching exists.
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = random_matrix(rng, 4, 4, 0.3, 100);
    const auto want = brute_assignment(x);
    if (want.cardinality < 4) continue;
    std::vector<int> perm{0, 1, 2, 3};
    double best = 1e300;
    do {
      double s = 0;
      for (int i = 0; i < 4; ++i) s += x.surrogate(i, perm[i]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(best == want.weight);
  }
}

TEST_CASE("delivery weight of an idle unit-capacity agent is the excess delivery time") {
  auto net = grid(4, 4, 300, 6);
  std::mt19937_64 rng(45);
  std::uniform_int_distribution<NodeId> node(0, 15);
  for (int trial = 0; trial < 100; ++trial) {
    NodeId r = node(rng), c = node(rng);
    if (r == c) continue;
    const Order o{1, 100, r, c, 240};
    CourierState cs{node(rng), 0, 1, {}, {}};
    const double w = delivery_weight(cs, single(o), *net, 160);
    CHECK(w == static_cast<double>(edt(o, cs, *net, 160) - sdt(o, *net)));
    CHECK(w == static_cast<double>(xdt(o, cs, *net, 160)));
  }
}

TEST_CASE("delivery weight of a busy agent includes the delay to carried orders") {
  auto net = grid(4, 4, 300, 6);
  std::mt19937_64 rng(46);
  std::uniform_int_distribution<NodeId> node(0, 15);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    NodeId r1 = node(rng), c1 = node(rng), r2 = node(rng), c2 = node(rng);
    if (r1 == c1 || r2 == c2) continue;
    const Order carried{1, 0, r1, c1, 0};
    const Order o{2, 200, r2, c2, 300};
    CourierState cs{r1, 250, 3, {carried}, {}};
    const auto with = brute_plan(cs, {o}, *net, 260);
    const auto without = brute_plan(cs, {}, *net, 260);
    // Sum form: new order's excess time plus the carried order's shift.
    const double want = static_cast<double>(std::max<Seconds>(0, with.drops.at(2) - o.placed_at - sdt(o, *net)) +
                                            with.drops.at(1) - without.drops.at(1));
    const double got = delivery_weight(cs, single(o), *net, 260);
    CHECK(got == want);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("combined weight adds lambda times the delivery weight") {
  auto net = grid(4, 4, 300, 6);
  const Order o{1, 0, 1, 14, 120};
  CourierState cs{0, 0, 2, {}, {}};
  AgentLedger l;
  l.work_time = 3600;
  l.active_time = 7200;
  for (double g : {0.0, 0.5, 1.0}) {
    l.guarantee_ratio = g;
    const double x = static_cast<double>(extra_work(cs, std::vector<Order>{o}, *net, 60));
    const double d = delivery_weight(cs, single(o), *net, 60);
    const double eq3 = guarantee_weight(3600, l.guarantee(), x);
    CHECK(combined_weight(cs, single(o), l, *net, 60, 0.0) == eq3);
    CHECK(combined_weight(cs, single(o), l, *net, 60, 1.0) == eq3 + d);
    CHECK(combined_weight(cs, single(o), l, *net, 60, 2.0) == eq3 + 2 * d);
  }
  CourierState full{0, 0, 1, {Order{9, 0, 2, 3, 0}}, {}};
  CHECK(combined_weight(full, single(o), l, *net, 60, 1.0) == kInfeasible);
}

TEST_CASE("feasibility gates: capacity and SLA") {
  auto net = grid(1, 30, 500, 5);  // 100 s per edge
  const Seconds sla = 2700;
  const Order near{1, 0, 2, 12, 0};  // delivered at 1200 s = 20 min by an agent at node 2
  CHECK(feasible(CourierState{2, 0, 1, {}, {}}, single(near), *net, 0, sla));
  CHECK_FALSE(feasible(CourierState{2, 0, 1, {Order{5, 0, 3, 4, 0}}, {}}, single(near), *net, 0, sla));
  const Order far{2, 0, 29, 0, 0};  // first mile 2900 s + last mile 2900 s = 96 min
  CHECK_FALSE(feasible(CourierState{0, 0, 1, {}, {}}, single(far), *net, 0, sla));
  const Order fifty{3, 0, 0, 30 - 1, 0};
  CHECK(edt(fifty, CourierState{0, 0, 1, {}, {}}, *net, 100) == 3000);  // 50 min
  CHECK_FALSE(feasible(CourierState{0, 0, 1, {}, {}}, single(fifty), *net, 100, sla));
}

TEST_CASE("evaluate_edge respects the availability gate") {
  auto net = grid(1, 10, 500, 5);
  const Order o{1, 0, 1, 5, 0};
  CourierState cs{0, 0, 1, {}, {}};
  const RoutePlan idle{0, 0, {}};
  const auto ok = evaluate_edge(cs, idle, single(o), *net, 0, 2700);
  CHECK(ok.feasible);
  CHECK(ok.extra_work == 500);
  CHECK_FALSE(evaluate_edge(cs, idle, single(o), *net, 0, 2700, 499).feasible);
  CHECK(evaluate_edge(cs, idle, single(o), *net, 0, 2700, 500).feasible);
}
