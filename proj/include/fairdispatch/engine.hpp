#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairdispatch/batching.hpp"
#include "fairdispatch/core.hpp"
#include "fairdispatch/gpr.hpp"
#include "fairdispatch/guarantee.hpp"
#include "fairdispatch/matching.hpp"
#include "fairdispatch/routing.hpp"
#include "fairdispatch/workload.hpp"

namespace fd {

/// kGuarantee: guarantee-aware weight plus lambda times the delivery-time weight.
/// kDeliveryTime: delivery-time weight alone (the baseline dispatcher).
enum class MatchingMode { kGuarantee, kDeliveryTime };

std::string to_string(MatchingMode m);
MatchingMode matching_mode_from_string(const std::string& s);

struct SimConfig {
  Seconds window_seconds = 180;
  Seconds sla_seconds = 2700;
  double lambda = 1.0;
  MatchingMode matching = MatchingMode::kGuarantee;
  GuaranteePolicy policy;
  CostModel cost;
  BatchingParams batching;
  std::uint64_t seed = 1;
  std::optional<int> capacity_override;
  bool gpr_uses_rating = false;
  bool allow_same_node_orders = false;

  void validate() const;
};

enum class OrderState { kPending, kAssigned, kDelivered, kUndeliverable };

struct OrderRecord {
  Order order;
  OrderState state = OrderState::kPending;
  Seconds sdt = 0;
  Seconds assigned_at = -1;
  Seconds picked_at = -1;
  Seconds delivered_at = -1;
  AgentId agent = -1;

  Seconds delivery_time() const { return delivered_at - order.placed_at; }
};

struct AgentRecord {
  AgentSession session;
  AgentLedger ledger;
  double handout = 0.0;
  bool rejected = false;
  Seconds joined_at = -1;
  FeatureVector features;
  std::optional<double> predicted_work_h;
};

struct WindowRecord {
  int index = 0;
  Seconds time = 0;
  int new_orders = 0;
  int pending_orders = 0;
  int batches = 0;
  int active_agents = 0;
  int assigned_batches = 0;
  int assigned_orders = 0;
};

struct AssignmentRecord {
  int window = 0;
  Seconds time = 0;
  std::vector<OrderId> orders;
  AgentId agent = 0;
  double weight = 0.0;
  bool operator==(const AssignmentRecord& o) const {
    return window == o.window && time == o.time && orders == o.orders && agent == o.agent;
  }
};

enum class EventKind { kLogin, kReject, kLogoff, kAssign, kPickup, kDrop, kWork };

std::string to_string(EventKind k);

/// One raw simulation event. kWork spans [time, end]; kLogin carries the
/// guarantee ratio in `value`; kLogoff spans the whole session.
struct Event {
  Seconds time = 0;
  EventKind kind = EventKind::kLogin;
  AgentId agent = -1;
  OrderId order = -1;
  Seconds end = 0;
  double value = 0.0;
};

struct SimReport {
  Seconds window_seconds = 180;
  Seconds sla_seconds = 2700;
  CostModel cost;
  std::vector<OrderRecord> orders;   // sorted by order id
  std::vector<AgentRecord> agents;   // sorted by agent id
  std::vector<WindowRecord> windows;
  std::vector<AssignmentRecord> assignments;
  std::vector<Event> events;
  std::vector<double> window_runtime_s;  // wall clock, not deterministic
  std::vector<std::string> warnings;

  std::vector<AgentLedger> accepted_ledgers() const;
  double platform_cost() const;
  double total_handouts() const;
};

/// Result of one matching round.
struct WindowOutcome {
  WindowRecord record;
  std::vector<AssignmentRecord> assignments;
};

/// Window-by-window dispatcher owning all order and agent state.
class Engine {
 public:
  Engine(const Workload& workload, SimConfig cfg);

  /// Time of the next matching round.
  Seconds next_window_time() const { return now_ + cfg_.window_seconds; }
  bool finished() const;

  /// Advances routes to the next window boundary, then ingests orders,
  /// admits agents and matches batches to agents.
  WindowOutcome run_window();

  /// Moves every agent along its plan up to `until`, accruing work and active
  /// time and completing pickups and drops.
  void execute_routes(Seconds until);

  /// Completes all outstanding routes and closes every ledger.
  SimReport finish();

  const SimConfig& config() const { return cfg_; }
  Seconds now() const { return now_; }

 private:
  struct AgentRuntime {
    AgentRecord rec;
    bool joined = false;
    bool finalized = false;
    NodeId node = 0;
    Seconds free_at = 0;
    Seconds accounted_until = 0;
    Seconds busy_since = -1;
    RoutePlan plan;
    std::vector<Order> onboard;
    std::vector<Order> assigned;
  };

  void admit_agents(int window_new_orders);
  void accrue_agent(AgentRuntime& a, Seconds until);
  void finalize_agent(AgentRuntime& a);
  CourierState commit_point(const AgentRuntime& a, RoutePlan& tail) const;

  const Workload& workload_;
  SimConfig cfg_;
  const RoadNetwork& net_;
  std::vector<OrderRecord> orders_;        // sorted by placed_at, then id
  std::map<OrderId, std::size_t> order_index_;
  std::size_t next_order_ = 0;
  std::vector<OrderId> pending_;
  std::vector<AgentRuntime> agents_;       // sorted by id
  std::size_t next_session_ = 0;
  std::vector<std::size_t> session_order_;  // agent indices by login time
  std::vector<int> recent_new_orders_;
  Seconds now_ = 0;
  Seconds last_event_ = 0;
  int window_index_ = 0;
  SimReport report_;
};

/// Runs every window of the workload and returns the finalized report.
SimReport run_simulation(const Workload& workload, const SimConfig& cfg);

}  // namespace fd
