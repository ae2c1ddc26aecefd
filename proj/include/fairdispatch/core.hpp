#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace fd {

// All simulation time is integer seconds.
using Seconds = std::int64_t;
using NodeId = std::int32_t;
using OrderId = std::int64_t;
using AgentId = std::int64_t;

inline constexpr Seconds kSecondsPerHour = 3600;
inline constexpr Seconds kSecondsPerDay = 86400;

inline double to_hours(Seconds s) { return static_cast<double>(s) / kSecondsPerHour; }

/// Caller broke a documented precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data (files, workloads).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Order {
  OrderId id = 0;
  Seconds placed_at = 0;
  NodeId restaurant_node = 0;
  NodeId customer_node = 0;
  Seconds prep_time = 0;

  Seconds ready_at() const { return placed_at + prep_time; }
  bool operator==(const Order&) const = default;
};

struct AgentSession {
  AgentId id = 0;
  Seconds login_at = 0;
  Seconds logoff_at = 0;
  NodeId login_node = 0;
  int capacity = 3;
  int rating = 3;

  Seconds shift_length() const { return logoff_at - login_at; }
  bool operator==(const AgentSession&) const = default;
};

/// Per-agent accounting of work, active time and guarantee.
struct AgentLedger {
  Seconds work_time = 0;
  Seconds active_time = 0;
  double guarantee_ratio = 0.0;
  double distance_m = 0.0;
  bool accepted = true;

  /// G_v = g_v * A_v, in seconds.
  double guarantee() const { return guarantee_ratio * static_cast<double>(active_time); }
};

struct CostModel {
  double pay_rate = 100.0;  // per hour worked
  double min_wage = 25.0;   // per active hour
  double co2_grams_per_km = 120.0;

  void validate() const;
};

/// Adds `interval` seconds of active time, and of work time when servicing.
AgentLedger accrue(AgentLedger ledger, Seconds interval, bool servicing);

/// Clamps a guarantee ratio into [0, 1].
double clamp_ratio(double g);

/// Money paid for the unmet part of the guarantee at shift end; zero for rejected agents.
double handout(const AgentLedger& ledger, const CostModel& cm);

/// Work payments plus handouts summed over all ledgers.
double platform_cost(std::span<const AgentLedger> ledgers, const CostModel& cm);

/// Sum of handouts only.
double total_handouts(std::span<const AgentLedger> ledgers, const CostModel& cm);

/// Hourly pay rate that turns guarantee ratio g into exactly `min_wage` per active hour.
double pay_rate_for_guarantee(double g, double min_wage);

}  // namespace fd
