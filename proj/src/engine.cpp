#include "fairdispatch/engine.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace fd {

std::string to_string(MatchingMode m) {
  return m == MatchingMode::kGuarantee ? "guarantee" : "delivery_time";
}

MatchingMode matching_mode_from_string(const std::string& s) {
  if (s == "guarantee") return MatchingMode::kGuarantee;
  if (s == "delivery_time" || s == "baseline") return MatchingMode::kDeliveryTime;
  throw ConfigError("unknown matching mode '" + s + "' (expected guarantee or delivery_time)");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::kLogin: return "login";
    case EventKind::kReject: return "reject";
    case EventKind::kLogoff: return "logoff";
    case EventKind::kAssign: return "assign";
    case EventKind::kPickup: return "pickup";
    case EventKind::kDrop: return "drop";
    case EventKind::kWork: return "work";
  }
  return "?";
}

void SimConfig::validate() const {
  if (window_seconds <= 0) throw ConfigError("window_seconds must be positive");
  if (sla_seconds <= 0) throw ConfigError("sla_seconds must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (batching.max_batch_size < 1) throw ConfigError("max_batch_size must be at least 1");
  if (batching.max_batch_xdt < 0) throw ConfigError("max_batch_xdt must be nonnegative");
  if (capacity_override && (*capacity_override < 1 || *capacity_override > kMaxPlannedOrders)) {
    throw ConfigError("capacity must lie in 1..5");
  }
  policy.validate();
  cost.validate();
}

std::vector<AgentLedger> SimReport::accepted_ledgers() const {
  std::vector<AgentLedger> out;
  for (const auto& a : agents)
    if (a.ledger.accepted) out.push_back(a.ledger);
  return out;
}

double SimReport::platform_cost() const { return fd::platform_cost(accepted_ledgers(), cost); }

double SimReport::total_handouts() const { return fd::total_handouts(accepted_ledgers(), cost); }

namespace {

Seconds overlap(Seconds a0, Seconds a1, Seconds b0, Seconds b1) {
  return std::max<Seconds>(0, std::min(a1, b1) - std::max(a0, b0));
}

constexpr int kFeatureHistoryWindows = 20;

}  // namespace

Engine::Engine(const Workload& workload, SimConfig cfg)
    : workload_(workload), cfg_(std::move(cfg)), net_(*workload.network) {
  cfg_.validate();
  validate_workload(workload_, {cfg_.allow_same_node_orders});
  report_.window_seconds = cfg_.window_seconds;
  report_.sla_seconds = cfg_.sla_seconds;
  report_.cost = cfg_.cost;

  std::vector<Order> sorted = workload_.orders;
  std::sort(sorted.begin(), sorted.end(), [](const Order& a, const Order& b) {
    return a.placed_at != b.placed_at ? a.placed_at < b.placed_at : a.id < b.id;
  });
  int undeliverable = 0;
  for (const auto& o : sorted) {
    OrderRecord r;
    r.order = o;
    if (!net_.serviced(o.restaurant_node) || !net_.serviced(o.customer_node)) {
      r.state = OrderState::kUndeliverable;
    } else {
      try {
        r.sdt = sdt(o, net_);
      } catch (const UnreachableError&) {
        r.state = OrderState::kUndeliverable;
      }
    }
    if (r.state == OrderState::kUndeliverable) ++undeliverable;
    order_index_[o.id] = orders_.size();
    orders_.push_back(r);
  }
  if (undeliverable > 0) {
    report_.warnings.push_back(std::to_string(undeliverable) + " undeliverable orders excluded from the stream");
  }

  std::vector<AgentSession> sessions = workload_.agents;
  std::sort(sessions.begin(), sessions.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (auto& s : sessions) {
    if (cfg_.capacity_override) s.capacity = *cfg_.capacity_override;
    AgentRuntime a;
    a.rec.session = s;
    a.node = s.login_node;
    agents_.push_back(std::move(a));
  }
  session_order_.resize(agents_.size());
  std::iota(session_order_.begin(), session_order_.end(), 0);
  std::sort(session_order_.begin(), session_order_.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = agents_[x].rec.session;
    const auto& b = agents_[y].rec.session;
    return a.login_at != b.login_at ? a.login_at < b.login_at : a.id < b.id;
  });

  Seconds first = std::numeric_limits<Seconds>::max();
  Seconds last = std::numeric_limits<Seconds>::min();
  for (const auto& o : orders_) {
    first = std::min(first, o.order.placed_at);
    last = std::max(last, o.order.placed_at + cfg_.sla_seconds);
  }
  for (const auto& a : agents_) {
    first = std::min(first, a.rec.session.login_at);
    last = std::max(last, a.rec.session.logoff_at);
  }
  if (first > last) first = last = 0;
  const Seconds w = cfg_.window_seconds;
  now_ = (first >= 0 ? first / w : (first - w + 1) / w) * w;
  last_event_ = std::max(last, now_);
}

bool Engine::finished() const { return now_ >= last_event_; }

CourierState Engine::commit_point(const AgentRuntime& a, RoutePlan& tail) const {
  CourierState c;
  c.capacity = a.rec.session.capacity;
  if (a.plan.stops.empty()) {
    c.node = a.node;
    c.free_at = std::max(a.free_at, now_);
    tail = RoutePlan{c.node, c.free_at, {}};
    return c;
  }
  // The stop currently being approached is committed; everything after it may be re-planned.
  const Stop& first = a.plan.stops.front();
  c.node = first.node;
  c.free_at = first.departure;
  c.onboard = a.onboard;
  c.assigned = a.assigned;
  if (first.kind == StopKind::kPickup) {
    auto it = std::find_if(c.assigned.begin(), c.assigned.end(), [&](const Order& o) { return o.id == first.order; });
    c.onboard.push_back(*it);
    c.assigned.erase(it);
  } else {
    std::erase_if(c.onboard, [&](const Order& o) { return o.id == first.order; });
  }
  tail = RoutePlan{first.node, first.departure, {a.plan.stops.begin() + 1, a.plan.stops.end()}};
  return c;
}

void Engine::accrue_agent(AgentRuntime& a, Seconds until) {
  const Seconds from = a.accounted_until;
  if (until <= from) return;
  const auto& s = a.rec.session;
  const Seconds active = overlap(from, until, s.login_at, s.logoff_at);
  Seconds work = 0;
  Seconds work_in_active = 0;
  if (a.busy_since >= 0) {
    const Seconds busy_end = a.plan.completion_time();
    work = overlap(from, until, a.busy_since, busy_end);
    work_in_active = overlap(std::max(from, a.busy_since), std::min(until, busy_end), s.login_at, s.logoff_at);
  }
  a.rec.ledger = accrue(a.rec.ledger, work_in_active, true);
  a.rec.ledger = accrue(a.rec.ledger, active - work_in_active, false);
  // Deliveries finishing after logoff keep accruing work.
  a.rec.ledger.work_time += work - work_in_active;
  a.accounted_until = until;
}

void Engine::execute_routes(Seconds until) {
  for (auto& a : agents_) {
    if (!a.joined || a.finalized) continue;
    accrue_agent(a, until);
    std::size_t done = 0;
    for (const auto& stop : a.plan.stops) {
      if (stop.departure > until) break;
      ++done;
      a.rec.ledger.distance_m += stop.leg_distance_m;
      a.node = stop.node;
      auto& rec = orders_[order_index_.at(stop.order)];
      if (stop.kind == StopKind::kPickup) {
        auto it = std::find_if(a.assigned.begin(), a.assigned.end(), [&](const Order& o) { return o.id == stop.order; });
        a.onboard.push_back(*it);
        a.assigned.erase(it);
        rec.picked_at = stop.departure;
        report_.events.push_back({stop.departure, EventKind::kPickup, a.rec.session.id, stop.order, stop.departure, 0.0});
      } else {
        std::erase_if(a.onboard, [&](const Order& o) { return o.id == stop.order; });
        rec.delivered_at = stop.departure;
        rec.state = OrderState::kDelivered;
        report_.events.push_back({stop.departure, EventKind::kDrop, a.rec.session.id, stop.order, stop.departure, 0.0});
      }
    }
    if (done > 0) {
      const Seconds completion = a.plan.completion_time();
      a.plan.stops.erase(a.plan.stops.begin(), a.plan.stops.begin() + static_cast<std::ptrdiff_t>(done));
      if (a.plan.stops.empty()) {
        report_.events.push_back({a.busy_since, EventKind::kWork, a.rec.session.id, -1, completion, 0.0});
        a.busy_since = -1;
        a.free_at = completion;
        a.plan = RoutePlan{a.node, completion, {}};
      } else {
        const Stop& last_done = a.plan.stops.front();
        a.plan.start_node = a.node;
        a.plan.start_time = last_done.arrival;  // informational only
      }
    }
    if (a.plan.stops.empty() && until >= a.rec.session.logoff_at) finalize_agent(a);
  }
}

void Engine::finalize_agent(AgentRuntime& a) {
  a.finalized = true;
  a.rec.handout = handout(a.rec.ledger, cfg_.cost);
  report_.events.push_back({a.rec.session.logoff_at, EventKind::kLogoff, a.rec.session.id, -1,
                            a.rec.session.logoff_at, a.rec.handout});
}

void Engine::admit_agents(int /*window_new_orders*/) {
  int active_count = 0;
  for (const auto& a : agents_) {
    if (a.joined && a.rec.ledger.accepted && a.rec.session.logoff_at > now_) ++active_count;
  }
  double orders_per_window = 0.0;
  if (!recent_new_orders_.empty()) {
    const std::size_t n = std::min<std::size_t>(recent_new_orders_.size(), kFeatureHistoryWindows);
    orders_per_window =
        std::accumulate(recent_new_orders_.end() - static_cast<std::ptrdiff_t>(n), recent_new_orders_.end(), 0.0) / n;
  }
  const auto& policy = cfg_.policy;
  while (next_session_ < session_order_.size() &&
         agents_[session_order_[next_session_]].rec.session.login_at <= now_) {
    auto& a = agents_[session_order_[next_session_++]];
    const auto& s = a.rec.session;
    const auto& node = net_.node(s.login_node);
    a.rec.features = FeatureVector{static_cast<double>(s.login_at % kSecondsPerDay),
                                   static_cast<double>(s.logoff_at % kSecondsPerDay),
                                   node.lat,
                                   node.lon,
                                   static_cast<double>(active_count),
                                   orders_per_window,
                                   static_cast<double>(s.rating)};
    a.rec.joined_at = now_;
    const double active_h = to_hours(s.shift_length());
    if (policy.needs_prediction()) {
      a.rec.predicted_work_h = policy.model->predict(a.rec.features.values(cfg_.gpr_uses_rating)).mean;
    }
    if (policy.rejection_enabled && should_reject(*a.rec.predicted_work_h, policy.baseline_g, active_h)) {
      a.rec.rejected = true;
      a.rec.ledger.accepted = false;
      a.rec.ledger.guarantee_ratio = 0.0;
      a.joined = true;
      a.finalized = true;
      report_.events.push_back({now_, EventKind::kReject, s.id, -1, now_, *a.rec.predicted_work_h});
      continue;
    }
    switch (policy.mode) {
      case GuaranteeMode::kFixed: a.rec.ledger.guarantee_ratio = clamp_ratio(policy.g); break;
      case GuaranteeMode::kDynamic: a.rec.ledger.guarantee_ratio = dynamic_g(*a.rec.predicted_work_h, active_h); break;
      case GuaranteeMode::kRatingBased: a.rec.ledger.guarantee_ratio = rating_based_g(s.rating, policy.omega); break;
    }
    a.joined = true;
    a.node = s.login_node;
    a.free_at = s.login_at;
    a.accounted_until = s.login_at;
    a.plan = RoutePlan{a.node, s.login_at, {}};
    report_.events.push_back({s.login_at, EventKind::kLogin, s.id, -1, s.logoff_at, a.rec.ledger.guarantee_ratio});
    ++active_count;
    accrue_agent(a, now_);
  }
}

WindowOutcome Engine::run_window() {
  const auto clock_start = std::chrono::steady_clock::now();
  now_ += cfg_.window_seconds;
  const Seconds T = now_;
  execute_routes(T);

  WindowOutcome out;
  out.record.index = window_index_;
  out.record.time = T;
  while (next_order_ < orders_.size() && orders_[next_order_].order.placed_at <= T) {
    const auto& rec = orders_[next_order_++];
    if (rec.state == OrderState::kPending) {
      pending_.push_back(rec.order.id);
      ++out.record.new_orders;
    }
  }
  admit_agents(out.record.new_orders);
  recent_new_orders_.push_back(out.record.new_orders);

  std::vector<std::size_t> cols;
  int max_capacity = 0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& a = agents_[i];
    if (!a.joined || a.finalized || a.rec.rejected) continue;
    if (a.rec.session.login_at > T || a.rec.session.logoff_at <= T) continue;
    ++out.record.active_agents;
    if (a.onboard.size() + a.assigned.size() >= static_cast<std::size_t>(a.rec.session.capacity)) continue;
    cols.push_back(i);
    max_capacity = std::max(max_capacity, a.rec.session.capacity);
  }

  // Orders that can no longer meet the SLA stay pending but are not matched.
  std::vector<Order> live;
  for (OrderId id : pending_) {
    const auto& o = orders_[order_index_.at(id)].order;
    if (T - o.placed_at < cfg_.sla_seconds) live.push_back(o);
  }
  out.record.pending_orders = static_cast<int>(pending_.size());

  if (!live.empty() && !cols.empty()) {
    BatchingParams bp = cfg_.batching;
    bp.max_batch_size = std::max(1, std::min(bp.max_batch_size, max_capacity));
    const auto batches = batch_orders(live, net_, T, bp);
    out.record.batches = static_cast<int>(batches.size());

    std::vector<CourierState> couriers(cols.size());
    std::vector<RoutePlan> tails(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) couriers[c] = commit_point(agents_[cols[c]], tails[c]);

    CostMatrix m(batches.size(), cols.size());
    std::vector<std::vector<RoutePlan>> plans(batches.size(), std::vector<RoutePlan>(cols.size()));
    for (std::size_t r = 0; r < batches.size(); ++r) {
      const auto& b = batches[r];
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& a = agents_[cols[c]];
        const auto& courier = couriers[c];
        if (courier.load() + static_cast<int>(b.orders.size()) > courier.capacity) continue;
        const Seconds start = std::max(T, courier.free_at);
        // Lower bound per order: reach its restaurant, then drive straight to the customer.
        bool hopeless = false;
        for (const auto& o : b.orders) {
          const Seconds at_rest = std::max(start + net_.travel_time(courier.node, o.restaurant_node, start), o.ready_at());
          const Seconds at_cust = at_rest + net_.travel_time(o.restaurant_node, o.customer_node, at_rest);
          if (at_cust - o.placed_at > cfg_.sla_seconds || at_cust > a.rec.session.logoff_at) {
            hopeless = true;
            break;
          }
        }
        if (hopeless) continue;
        auto ev = evaluate_edge(courier, tails[c], b, net_, T, cfg_.sla_seconds, a.rec.session.logoff_at);
        if (!ev.feasible) continue;
        double weight = ev.delivery_weight;
        if (cfg_.matching == MatchingMode::kGuarantee) {
          const auto& l = a.rec.ledger;
          weight = guarantee_weight(static_cast<double>(l.work_time), l.guarantee(), static_cast<double>(ev.extra_work)) +
                   cfg_.lambda * ev.delivery_weight;
        }
        m.at(r, c) = weight;
        plans[r][c] = std::move(ev.plan);
      }
    }

    for (auto [r, c] : min_cost_assignment(m)) {
      auto& a = agents_[cols[c]];
      const auto& b = batches[r];
      RoutePlan next = std::move(plans[r][c]);
      if (!a.plan.stops.empty()) {
        next.stops.insert(next.stops.begin(), a.plan.stops.front());
        next.start_node = a.plan.start_node;
        next.start_time = a.plan.start_time;
      }
      a.plan = std::move(next);
      if (a.busy_since < 0) a.busy_since = T;
      AssignmentRecord ar{window_index_, T, {}, a.rec.session.id, m.at(r, c)};
      for (const auto& o : b.orders) {
        a.assigned.push_back(o);
        auto& rec = orders_[order_index_.at(o.id)];
        rec.state = OrderState::kAssigned;
        rec.assigned_at = T;
        rec.agent = a.rec.session.id;
        ar.orders.push_back(o.id);
        report_.events.push_back({T, EventKind::kAssign, a.rec.session.id, o.id, T, 0.0});
      }
      out.record.assigned_orders += static_cast<int>(b.orders.size());
      ++out.record.assigned_batches;
      out.assignments.push_back(std::move(ar));
    }
    std::erase_if(pending_, [&](OrderId id) { return orders_[order_index_.at(id)].state != OrderState::kPending; });
  }

  report_.windows.push_back(out.record);
  report_.assignments.insert(report_.assignments.end(), out.assignments.begin(), out.assignments.end());
  ++window_index_;
  report_.window_runtime_s.push_back(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count());
  return out;
}

SimReport Engine::finish() {
  Seconds until = std::max(now_, last_event_);
  for (const auto& a : agents_) {
    until = std::max(until, a.plan.completion_time());
    until = std::max(until, a.rec.session.logoff_at);
  }
  execute_routes(until);
  for (auto& a : agents_) {
    if (!a.joined) {
      // Session never reached a matching round; it still counts as logged in.
      a.joined = true;
      a.accounted_until = a.rec.session.login_at;
      a.rec.ledger.guarantee_ratio = 0.0;
      accrue_agent(a, until);
      report_.events.push_back({a.rec.session.login_at, EventKind::kLogin, a.rec.session.id, -1,
                                a.rec.session.logoff_at, 0.0});
    }
    if (!a.finalized) finalize_agent(a);
  }

  SimReport r = std::move(report_);
  r.orders = orders_;
  std::sort(r.orders.begin(), r.orders.end(), [](const auto& a, const auto& b) { return a.order.id < b.order.id; });
  for (const auto& a : agents_) r.agents.push_back(a.rec);
  report_ = SimReport{};
  return r;
}

SimReport run_simulation(const Workload& workload, const SimConfig& cfg) {
  Engine engine(workload, cfg);
  while (!engine.finished()) engine.run_window();
  return engine.finish();
}

}  // namespace fd
