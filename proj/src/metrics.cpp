#include "fairdispatch/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace fd {

double gini(std::span<const double> values) {
  if (values.empty()) throw ContractError("gini of an empty list");
  for (double v : values) {
    if (!(v >= 0.0)) throw ContractError("gini requires nonnegative values");
  }
  // Sorted form of the pairwise sum: sum_i (2i - n + 1) x_(i) equals half the pair sum.
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) weighted += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
  return std::clamp(weighted / (n * total), 0.0, 1.0);
}

double overflow_pct(std::span<const double> runtimes_s, Seconds window_seconds) {
  if (runtimes_s.empty()) return 0.0;
  const auto over = std::count_if(runtimes_s.begin(), runtimes_s.end(),
                                  [&](double r) { return r > static_cast<double>(window_seconds); });
  return 100.0 * static_cast<double>(over) / static_cast<double>(runtimes_s.size());
}

MetricsReport compute_metrics(const SimReport& report) {
  MetricsReport m;
  m.pay_rate = report.cost.pay_rate;
  m.orders = static_cast<int>(report.orders.size());
  double delivery_sum = 0.0;
  int late = 0;
  for (const auto& o : report.orders) {
    if (o.state == OrderState::kUndeliverable) continue;
    ++m.deliverable_orders;
    if (o.state == OrderState::kDelivered) {
      ++m.delivered_orders;
      delivery_sum += static_cast<double>(o.delivery_time());
      if (o.delivery_time() > report.sla_seconds) ++late;
    } else {
      ++m.undelivered_orders;
      ++late;
    }
  }
  if (m.delivered_orders > 0) m.avg_delivery_time_s = delivery_sum / m.delivered_orders;
  if (m.deliverable_orders > 0) m.sla_violation_pct = 100.0 * late / m.deliverable_orders;

  std::vector<double> income, income_work, min_wage_work;
  double distance_m = 0.0;
  m.agents = static_cast<int>(report.agents.size());
  for (const auto& a : report.agents) {
    distance_m += a.ledger.distance_m;
    if (!a.ledger.accepted) {
      ++m.rejected_agents;
      continue;
    }
    ++m.accepted_agents;
    const double work_h = to_hours(a.ledger.work_time);
    const double active_h = to_hours(a.ledger.active_time);
    m.total_work_h += work_h;
    m.total_active_h += active_h;
    if (a.ledger.active_time <= 0) continue;
    const double pay = report.cost.pay_rate * work_h;
    income.push_back((pay + a.handout) / active_h);
    income_work.push_back(pay / active_h);
    min_wage_work.push_back(std::min<double>(static_cast<double>(a.ledger.work_time), a.ledger.guarantee()) /
                            static_cast<double>(a.ledger.active_time));
  }
  if (!income.empty()) {
    m.gini_income_per_active = gini(income);
    m.gini_income_per_active_work_only = gini(income_work);
    m.gini_work_for_min_wage = gini(min_wage_work);
  }
  if (m.accepted_agents > 0) {
    m.avg_work_per_agent_h = m.total_work_h / m.accepted_agents;
    m.avg_active_per_agent_h = m.total_active_h / m.accepted_agents;
  }
  m.co2_kg = distance_m / 1000.0 * report.cost.co2_grams_per_km / 1000.0;
  m.platform_cost = report.platform_cost();
  m.total_handouts = report.total_handouts();

  const auto& rt = report.window_runtime_s;
  m.windows = static_cast<int>(rt.size());
  if (!rt.empty()) {
    m.avg_window_runtime_s = std::accumulate(rt.begin(), rt.end(), 0.0) / static_cast<double>(rt.size());
    m.max_window_runtime_s = *std::max_element(rt.begin(), rt.end());
  }
  m.overflow_pct = overflow_pct(rt, report.window_seconds);
  return m;
}

nlohmann::ordered_json MetricsReport::to_json(bool include_timing) const {
  nlohmann::ordered_json j;
  j["orders"] = orders;
  j["deliverable_orders"] = deliverable_orders;
  j["delivered_orders"] = delivered_orders;
  j["undelivered_orders"] = undelivered_orders;
  j["agents"] = agents;
  j["accepted_agents"] = accepted_agents;
  j["rejected_agents"] = rejected_agents;
  j["avg_delivery_time_s"] = avg_delivery_time_s;
  j["sla_violation_pct"] = sla_violation_pct;
  j["gini_income_per_active"] = gini_income_per_active;
  j["gini_income_per_active_work_only"] = gini_income_per_active_work_only;
  j["gini_work_for_min_wage"] = gini_work_for_min_wage;
  j["avg_work_per_agent_h"] = avg_work_per_agent_h;
  j["avg_active_per_agent_h"] = avg_active_per_agent_h;
  j["total_work_h"] = total_work_h;
  j["total_active_h"] = total_active_h;
  j["co2_kg"] = co2_kg;
  j["pay_rate"] = pay_rate;
  j["platform_cost"] = platform_cost;
  j["total_handouts"] = total_handouts;
  j["windows"] = windows;
  if (include_timing) j.update(timing_json());
  return j;
}

nlohmann::ordered_json MetricsReport::timing_json() const {
  nlohmann::ordered_json j;
  j["avg_window_runtime_s"] = avg_window_runtime_s;
  j["max_window_runtime_s"] = max_window_runtime_s;
  j["overflow_pct"] = overflow_pct;
  return j;
}

void print_table(std::ostream& os, const MetricsReport& m) {
  auto row = [&](const char* name, double v, const char* unit) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-34s %14.4f %s\n", name, v, unit);
    os << buf;
  };
  row("Avg. delivery time", m.avg_delivery_time_s / 60.0, "min");
  row("SLA violations", m.sla_violation_pct, "%");
  row("Gini income/active time", m.gini_income_per_active, "");
  row("Gini income/active (work pay only)", m.gini_income_per_active_work_only, "");
  row("Gini work for min. wage", m.gini_work_for_min_wage, "");
  row("Avg. work per agent", m.avg_work_per_agent_h, "h");
  row("CO2 emissions", m.co2_kg, "kg");
  row("Platform cost", m.platform_cost, "");
  row("Total handouts", m.total_handouts, "");
  row("Avg. window runtime", m.avg_window_runtime_s, "s");
  row("Max. window runtime", m.max_window_runtime_s, "s");
  row("Overflown windows", m.overflow_pct, "%");
  os << "orders " << m.orders << " delivered " << m.delivered_orders << " undelivered " << m.undelivered_orders
     << " agents " << m.accepted_agents << " accepted, " << m.rejected_agents << " rejected\n";
}

}  // namespace fd
