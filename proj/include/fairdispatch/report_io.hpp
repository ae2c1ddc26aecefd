#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fairdispatch/config.hpp"
#include "fairdispatch/engine.hpp"
#include "fairdispatch/metrics.hpp"

namespace fd {

// Report tables. Headers:
//   orders.csv       id,placed_at,state,sdt,assigned_at,picked_at,delivered_at,delivery_time,agent
//   agents.csv       id,login_at,logoff_at,capacity,rating,accepted,guarantee_ratio,work_s,active_s,
//                    distance_m,handout,predicted_work_h
//   windows.csv      index,time,new_orders,pending_orders,batches,active_agents,assigned_batches,assigned_orders
//   assignments.csv  window,time,agent,orders,weight     (orders joined with ';')
//   events.csv       time,kind,agent,order,end,value
void write_order_records(std::ostream& os, const SimReport& r);
void write_agent_records(std::ostream& os, const SimReport& r);
void write_window_records(std::ostream& os, const SimReport& r);
void write_assignment_records(std::ostream& os, const SimReport& r);
void write_events(std::ostream& os, const SimReport& r);

std::string to_string(OrderState s);

/// Writes every table plus summary.json into `dir`. Wall-clock data goes to
/// timing.json so the remaining files are byte-identical across repeated runs.
void write_sim_outputs(const std::filesystem::path& dir, const SimReport& r, const MetricsReport& m,
                       const Json& config);

void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Output directory that appears atomically: files go into a hidden sibling
/// which is renamed onto the target by commit(). Refuses an existing target
/// unless `force` is set.
class StagedDir {
 public:
  StagedDir(std::filesystem::path target, bool force);
  ~StagedDir();
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool force_;
  bool committed_ = false;
};

}  // namespace fd
