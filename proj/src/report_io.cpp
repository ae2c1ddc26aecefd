#include "fairdispatch/report_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "csv.hpp"

namespace fd {

namespace fs = std::filesystem;
using csv::format_double;

std::string to_string(OrderState s) {
  switch (s) {
    case OrderState::kPending: return "pending";
    case OrderState::kAssigned: return "assigned";
    case OrderState::kDelivered: return "delivered";
    case OrderState::kUndeliverable: return "undeliverable";
  }
  return "?";
}

void write_order_records(std::ostream& os, const SimReport& r) {
  os << "id,placed_at,state,sdt,assigned_at,picked_at,delivered_at,delivery_time,agent\n";
  for (const auto& o : r.orders) {
    os << o.order.id << ',' << o.order.placed_at << ',' << to_string(o.state) << ',' << o.sdt << ','
       << o.assigned_at << ',' << o.picked_at << ',' << o.delivered_at << ','
       << (o.state == OrderState::kDelivered ? o.delivery_time() : -1) << ',' << o.agent << '\n';
  }
}

void write_agent_records(std::ostream& os, const SimReport& r) {
  os << "id,login_at,logoff_at,capacity,rating,accepted,guarantee_ratio,work_s,active_s,distance_m,handout,"
        "predicted_work_h\n";
  for (const auto& a : r.agents) {
    const auto& s = a.session;
    const auto& l = a.ledger;
    os << s.id << ',' << s.login_at << ',' << s.logoff_at << ',' << s.capacity << ',' << s.rating << ','
       << (l.accepted ? 1 : 0) << ',' << format_double(l.guarantee_ratio) << ',' << l.work_time << ','
       << l.active_time << ',' << format_double(l.distance_m) << ',' << format_double(a.handout) << ','
       << (a.predicted_work_h ? format_double(*a.predicted_work_h) : "") << '\n';
  }
}

void write_window_records(std::ostream& os, const SimReport& r) {
  os << "index,time,new_orders,pending_orders,batches,active_agents,assigned_batches,assigned_orders\n";
  for (const auto& w : r.windows) {
    os << w.index << ',' << w.time << ',' << w.new_orders << ',' << w.pending_orders << ',' << w.batches << ','
       << w.active_agents << ',' << w.assigned_batches << ',' << w.assigned_orders << '\n';
  }
}

void write_assignment_records(std::ostream& os, const SimReport& r) {
  os << "window,time,agent,orders,weight\n";
  for (const auto& a : r.assignments) {
    os << a.window << ',' << a.time << ',' << a.agent << ',';
    for (std::size_t i = 0; i < a.orders.size(); ++i) os << (i ? ";" : "") << a.orders[i];
    os << ',' << format_double(a.weight) << '\n';
  }
}

void write_events(std::ostream& os, const SimReport& r) {
  os << "time,kind,agent,order,end,value\n";
  for (const auto& e : r.events) {
    os << e.time << ',' << to_string(e.kind) << ',' << e.agent << ',' << e.order << ',' << e.end << ','
       << format_double(e.value) << '\n';
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json_file(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace {

template <typename F>
void write_table(const fs::path& path, const SimReport& r, F writer) {
  std::ostringstream os;
  writer(os, r);
  write_text_file(path, os.str());
}

}  // namespace

void write_sim_outputs(const fs::path& dir, const SimReport& r, const MetricsReport& m, const Json& config) {
  write_table(dir / "orders.csv", r, write_order_records);
  write_table(dir / "agents.csv", r, write_agent_records);
  write_table(dir / "windows.csv", r, write_window_records);
  write_table(dir / "assignments.csv", r, write_assignment_records);
  write_table(dir / "events.csv", r, write_events);

  Json summary;
  summary["metrics"] = m.to_json(false);
  summary["config"] = config;
  summary["warnings"] = r.warnings;
  write_json_file(dir / "summary.json", summary);

  Json timing = m.timing_json();
  timing["window_runtime_s"] = r.window_runtime_s;
  write_json_file(dir / "timing.json", timing);
}

StagedDir::StagedDir(fs::path target, bool force) : target_(std::move(target)), force_(force) {
  if (target_.filename().empty()) target_ = target_.parent_path();
  if (fs::exists(target_) && !force_) {
    throw ConfigError("output directory " + target_.string() + " exists; pass --force to overwrite");
  }
  const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  staging_ = parent / ("." + target_.filename().string() + ".staging-" + std::to_string(::getpid()));
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

StagedDir::~StagedDir() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedDir::commit() {
  if (fs::exists(target_)) {
    if (!force_) throw ConfigError("output directory " + target_.string() + " appeared during the run");
    fs::remove_all(target_);
  }
  fs::rename(staging_, target_);
  committed_ = true;
}

}  // namespace fd
