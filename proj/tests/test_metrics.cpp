#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "fairdispatch/metrics.hpp"
#include "support.hpp"

using namespace fd;
using namespace fdtest;

namespace {

double pairwise_gini(const std::vector<double>& x) {
  double diff = 0, sum = 0;
  for (double a : x) {
    sum += a;
    for (double b : x) diff += std::abs(a - b);
  }
  if (sum == 0) return 0;
  const double n = static_cast<double>(x.size());
  return diff / (2 * n * n * (sum / n));
}

SimReport report_with(std::vector<AgentLedger> ledgers) {
  SimReport r;
  AgentId id = 0;
  for (auto& l : ledgers) {
    AgentRecord a;
    a.session.id = ++id;
    a.ledger = l;
    a.handout = handout(l, r.cost);
    r.agents.push_back(a);
  }
  return r;
}

}  // namespace

TEST_CASE("gini examples") {
  CHECK(gini(std::vector<double>{5, 5, 5, 5}) == 0.0);
  CHECK(gini(std::vector<double>{0, 0, 0, 1}) == doctest::Approx(0.75));
  CHECK(gini(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(0.25));
  CHECK(gini(std::vector<double>{0, 0}) == 0.0);
  CHECK(gini(std::vector<double>{3}) == 0.0);
  CHECK_THROWS_AS(gini(std::vector<double>{}), ContractError);
  CHECK_THROWS_AS(gini(std::vector<double>{1, -1}), ContractError);
}

TEST_CASE("gini matches pair enumeration and is scale and permutation invariant") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> len(1, 30);
  std::exponential_distribution<double> ex(1.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = ex(rng);
    const double g = gini(x);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    CHECK(g == doctest::Approx(pairwise_gini(x)).epsilon(1e-9));
    auto y = x;
    for (auto& v : y) v *= 3.7;
    CHECK(gini(y) == doctest::Approx(g).epsilon(1e-9));
    std::shuffle(y.begin(), y.end(), rng);
    CHECK(gini(y) == doctest::Approx(g).epsilon(1e-9));
  }
}

TEST_CASE("overflow counts runtimes strictly above the window") {
  const std::vector<double> rt{1.0, 180.0, 181.0, 0.2};
  CHECK(overflow_pct(rt, 180) == doctest::Approx(25.0));
  CHECK(overflow_pct(std::vector<double>{}, 180) == 0.0);
}

TEST_CASE("emissions follow distance") {
  AgentLedger l;
  l.active_time = 3600;
  l.distance_m = 100000;
  auto r = report_with({l});
  r.cost.co2_grams_per_km = 120;
  CHECK(compute_metrics(r).co2_kg == doctest::Approx(12.0));
}

TEST_CASE("identical ledgers are perfectly equal") {
  AgentLedger l;
  l.active_time = 7200;
  l.work_time = 3000;
  l.guarantee_ratio = 0.6;
  const auto m = compute_metrics(report_with({l, l, l}));
  CHECK(m.gini_income_per_active == 0.0);
  CHECK(m.gini_income_per_active_work_only == 0.0);
  CHECK(m.gini_work_for_min_wage == 0.0);
  CHECK(m.avg_work_per_agent_h == doctest::Approx(3000.0 / 3600));
}

TEST_CASE("handouts equalize income at the guarantee") {
  AgentLedger a, b;
  a.active_time = b.active_time = 3600;
  a.guarantee_ratio = b.guarantee_ratio = 1.0;
  a.work_time = 600;
  b.work_time = 1800;
  const auto m = compute_metrics(report_with({a, b}));
  CHECK(m.gini_income_per_active == 0.0);
  CHECK(m.gini_income_per_active_work_only > 0.0);
  CHECK(m.gini_work_for_min_wage == doctest::Approx(pairwise_gini({600.0 / 3600, 1800.0 / 3600})));
}

TEST_CASE("rejected agents are counted but excluded from the income statistics") {
  AgentLedger a, r;
  a.active_time = r.active_time = 3600;
  a.work_time = 1800;
  r.accepted = false;
  const auto m = compute_metrics(report_with({a, r}));
  CHECK(m.accepted_agents == 1);
  CHECK(m.rejected_agents == 1);
  CHECK(m.gini_income_per_active == 0.0);
  CHECK(m.platform_cost == doctest::Approx(50.0));
}

TEST_CASE("delivery metrics agree with the event log") {
  WorkloadConfig wc;
  wc.grid_rows = wc.grid_cols = 9;
  wc.restaurant_count = 10;
  wc.target_orders = 250;
  wc.agent_count = 12;
  const auto w = generate(wc);
  SimConfig cfg;
  cfg.policy.g = 0.3;
  const auto r = run_simulation(w, cfg);
  const auto m = compute_metrics(r);

  std::map<OrderId, Seconds> drop;
  for (const auto& e : r.events)
    if (e.kind == EventKind::kDrop) drop[e.order] = e.time;
  double sum = 0;
  int late = 0;
  for (const auto& o : w.orders) {
    auto it = drop.find(o.id);
    if (it == drop.end()) {
      ++late;
      continue;
    }
    sum += static_cast<double>(it->second - o.placed_at);
    if (it->second - o.placed_at > r.sla_seconds) ++late;
  }
  REQUIRE(!drop.empty());
  CHECK(m.delivered_orders == static_cast<int>(drop.size()));
  CHECK(m.avg_delivery_time_s == doctest::Approx(sum / drop.size()));
  CHECK(m.sla_violation_pct == doctest::Approx(100.0 * late / w.orders.size()));
  CHECK(m.platform_cost == doctest::Approx(cost_from_events(r)));

  const auto j = m.to_json(false);
  CHECK_FALSE(j.contains("overflow_pct"));
  CHECK(m.to_json(true).contains("overflow_pct"));
  std::ostringstream os;
  print_table(os, m);
  CHECK(os.str().find("Gini work for min. wage") != std::string::npos);
}
