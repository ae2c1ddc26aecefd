#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairdispatch/engine.hpp"
#include "json.hpp"

namespace fd {

/// Mean absolute difference Gini: sum_i sum_j |x_i - x_j| / (2 n^2 mean).
/// All-zero input gives 0. Throws ContractError on empty or negative input.
double gini(std::span<const double> values);

struct MetricsReport {
  int orders = 0;
  int deliverable_orders = 0;
  int delivered_orders = 0;
  int undelivered_orders = 0;
  int agents = 0;
  int accepted_agents = 0;
  int rejected_agents = 0;

  double avg_delivery_time_s = 0.0;
  double sla_violation_pct = 0.0;
  double gini_income_per_active = 0.0;            // pay for work plus handouts
  double gini_income_per_active_work_only = 0.0;  // pay for work alone
  double gini_work_for_min_wage = 0.0;            // min(W, G) / A
  double avg_work_per_agent_h = 0.0;
  double avg_active_per_agent_h = 0.0;
  double total_active_h = 0.0;
  double total_work_h = 0.0;
  double co2_kg = 0.0;
  double platform_cost = 0.0;
  double total_handouts = 0.0;
  double pay_rate = 0.0;

  // Wall clock; excluded from deterministic outputs.
  double avg_window_runtime_s = 0.0;
  double max_window_runtime_s = 0.0;
  double overflow_pct = 0.0;
  int windows = 0;

  nlohmann::ordered_json to_json(bool include_timing) const;
  nlohmann::ordered_json timing_json() const;
};

MetricsReport compute_metrics(const SimReport& report);

/// Fraction (in percent) of runtimes strictly above the window length.
double overflow_pct(std::span<const double> runtimes_s, Seconds window_seconds);

void print_table(std::ostream& os, const MetricsReport& m);

}  // namespace fd
