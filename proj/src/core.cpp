#include "fairdispatch/core.hpp"

#include <algorithm>
#include <cmath>

namespace fd {

void CostModel::validate() const {
  if (!(pay_rate > 0.0)) throw ConfigError("cost.pay_rate must be positive");
  if (!(min_wage > 0.0)) throw ConfigError("cost.min_wage must be positive");
  if (!(co2_grams_per_km >= 0.0)) throw ConfigError("cost.co2_grams_per_km must be nonnegative");
}

AgentLedger accrue(AgentLedger ledger, Seconds interval, bool servicing) {
  if (interval < 0) throw ContractError("accrue: negative interval " + std::to_string(interval));
  ledger.active_time += interval;
  if (servicing) ledger.work_time += interval;
  return ledger;
}

double clamp_ratio(double g) {
  if (std::isnan(g)) return 0.0;
  return std::clamp(g, 0.0, 1.0);
}

double handout(const AgentLedger& ledger, const CostModel& cm) {
  if (!ledger.accepted) return 0.0;
  const double shortfall_s = ledger.guarantee() - static_cast<double>(ledger.work_time);
  return cm.pay_rate * std::max(0.0, shortfall_s) / kSecondsPerHour;
}

double platform_cost(std::span<const AgentLedger> ledgers, const CostModel& cm) {
  double work_pay = 0.0;
  for (const auto& l : ledgers)
    if (l.accepted) work_pay += cm.pay_rate * to_hours(l.work_time);
  return work_pay + total_handouts(ledgers, cm);
}

double total_handouts(std::span<const AgentLedger> ledgers, const CostModel& cm) {
  double sum = 0.0;
  for (const auto& l : ledgers) sum += handout(l, cm);
  return sum;
}

double pay_rate_for_guarantee(double g, double min_wage) {
  if (!(g > 0.0)) {
    throw ContractError("pay_rate_for_guarantee: guarantee ratio must be positive (use a fixed pay rate when g = 0)");
  }
  return min_wage / g;
}

}  // namespace fd
