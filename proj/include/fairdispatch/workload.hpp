#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fairdispatch/core.hpp"
#include "fairdispatch/routing.hpp"

namespace fd {

/// Everything a simulation consumes.
struct Workload {
  std::shared_ptr<const RoadNetwork> network;
  std::vector<Order> orders;
  std::vector<AgentSession> agents;
};

/// Synthetic city and demand model.
struct WorkloadConfig {
  // Grid road network.
  int grid_rows = 21;
  int grid_cols = 21;
  double spacing_m = 150.0;
  double origin_lat = 28.50;
  double origin_lon = 77.10;
  double base_speed_mps = 6.0;
  double speed_jitter = 0.25;           // relative, per edge
  double congestion_amplitude = 0.0;    // 0 keeps speeds flat across the day
  int bucket_count = 24;

  // Restaurants cluster around a few centers; customers spread over the grid.
  int restaurant_count = 60;
  int restaurant_clusters = 5;
  double cluster_sigma_m = 500.0;

  // Orders: inhomogeneous Poisson process with a piecewise-constant hourly rate.
  std::vector<double> hourly_rate;   // orders per hour, 24 entries; empty selects the default profile
  double target_orders = 5000.0;     // scales the default profile
  double intensity_scale = 1.0;
  Seconds prep_min_s = 180;
  Seconds prep_max_s = 720;

  // Agent sessions; shift midpoints follow the demand profile.
  int agent_count = 200;
  double supply_scale = 1.0;
  double shift_min_h = 4.0;
  double shift_max_h = 8.0;
  int capacity = 3;

  std::uint64_t seed = 1;

  void validate() const;
  /// Hourly rate actually used (default profile scaled to target_orders when none given).
  std::vector<double> effective_hourly_rate() const;
};

/// Relative lunch/dinner-peaked demand shape, 24 entries.
const std::vector<double>& default_demand_shape();

Workload generate(const WorkloadConfig& cfg);

std::shared_ptr<const RoadNetwork> generate_network(const WorkloadConfig& cfg);

// CSV files. Headers:
//   nodes.csv   id,lat,lon
//   edges.csv   src,dst,length_m,speed_0..speed_{B-1}
//   orders.csv  id,placed_at,restaurant_node,customer_node,prep_s
//   agents.csv  id,login_at,logoff_at,login_node,capacity,rating
void write_nodes(std::ostream& os, const RoadNetwork& net);
void write_edges(std::ostream& os, const RoadNetwork& net);
void write_orders(std::ostream& os, const std::vector<Order>& orders);
void write_agents(std::ostream& os, const std::vector<AgentSession>& agents);

std::vector<NodeRecord> read_nodes(std::istream& is, const std::string& name = "nodes.csv");
/// Bucket count is inferred from the speed_* columns.
std::vector<EdgeRecord> read_edges(std::istream& is, int& bucket_count, const std::string& name = "edges.csv");
std::vector<Order> read_orders(std::istream& is, const std::string& name = "orders.csv");
std::vector<AgentSession> read_agents(std::istream& is, const std::string& name = "agents.csv");

void save_workload(const Workload& w, const std::filesystem::path& dir);
Workload load_workload(const std::filesystem::path& dir);

struct ValidationOptions {
  bool allow_same_node_orders = false;
};

/// Load-time checks shared by files and generated data. Throws DataError.
void validate_workload(const Workload& w, const ValidationOptions& opt = {});

}  // namespace fd
