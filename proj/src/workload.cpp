#include "fairdispatch/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include "csv.hpp"

namespace fd {

namespace {
constexpr double kMetersPerDegree = 111320.0;

Seconds clamp_login(double mid, Seconds length, Seconds day_start, Seconds day_end) {
  return std::clamp<Seconds>(std::lround(mid - length / 2.0), day_start, std::max(day_start, day_end - length));
}

// Hourly weights for session midpoints chosen so that the expected number of
// agents on shift in each hour is proportional to `profile`. Shifts smear a
// midpoint over several hours, so the smearing kernel is inverted with
// Richardson-Lucy iterations.
std::vector<double> midpoint_weights(const std::vector<double>& profile, Seconds day_start, Seconds day_end,
                                     double shift_min_h, double shift_max_h) {
  const int hours = static_cast<int>((day_end + kSecondsPerHour - 1) / kSecondsPerHour);
  const int first = static_cast<int>(day_start / kSecondsPerHour);
  constexpr int kMidSamples = 12;
  constexpr int kLengthSamples = 8;
  std::vector<std::vector<double>> kernel(hours, std::vector<double>(hours, 0.0));
  for (int h = first; h < hours; ++h) {
    for (int i = 0; i < kMidSamples; ++i) {
      const double mid = (h + (i + 0.5) / kMidSamples) * kSecondsPerHour;
      for (int j = 0; j < kLengthSamples; ++j) {
        const double len_h = shift_min_h + (j + 0.5) / kLengthSamples * (shift_max_h - shift_min_h);
        const auto length = static_cast<Seconds>(std::lround(len_h * kSecondsPerHour));
        const Seconds login = clamp_login(mid, length, day_start, day_end);
        for (int k = first; k < hours; ++k) {
          const Seconds lo = std::max<Seconds>(login, k * kSecondsPerHour);
          const Seconds hi = std::min<Seconds>(login + length, (k + 1) * kSecondsPerHour);
          if (hi > lo) kernel[h][k] += static_cast<double>(hi - lo) / kSecondsPerHour;
        }
      }
    }
  }
  std::vector<double> target(hours, 0.0);
  for (int k = first; k < std::min<int>(hours, 24); ++k) target[k] = profile[k];

  std::vector<double> m(hours, 0.0);
  for (int h = first; h < hours; ++h) m[h] = (h < 24 ? profile[h] : 0.0) + 1e-3;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> cover(hours, 0.0);
    for (int h = first; h < hours; ++h)
      for (int k = first; k < hours; ++k) cover[k] += m[h] * kernel[h][k];
    for (int h = first; h < hours; ++h) {
      double num = 0.0, den = 0.0;
      for (int k = first; k < hours; ++k) {
        if (target[k] <= 0.0 || cover[k] <= 0.0) continue;
        num += kernel[h][k] * target[k] / cover[k];
        den += kernel[h][k];
      }
      if (den > 0.0) m[h] *= num / den;
    }
  }
  return m;
}
}  // namespace

const std::vector<double>& default_demand_shape() {
  // Closed overnight; opens at 07:00.
  static const std::vector<double> shape{0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.40, 0.60, 0.70, 0.80, 1.20,
                                         2.00, 2.00, 1.20, 0.80, 0.70, 0.90, 1.30, 2.20, 2.40, 1.80, 1.00, 0.50};
  return shape;
}

void WorkloadConfig::validate() const {
  if (grid_rows < 1 || grid_cols < 1) throw ConfigError("workload grid must have at least one node");
  if (grid_rows * grid_cols < 2) throw ConfigError("workload grid needs at least two nodes");
  if (!(spacing_m > 0) || !(base_speed_mps > 0)) throw ConfigError("spacing and speed must be positive");
  if (speed_jitter < 0 || speed_jitter >= 1) throw ConfigError("speed_jitter must lie in [0, 1)");
  if (congestion_amplitude < 0 || congestion_amplitude >= 1) throw ConfigError("congestion_amplitude must lie in [0, 1)");
  if (restaurant_count < 1 || restaurant_clusters < 1) throw ConfigError("need at least one restaurant and cluster");
  if (!hourly_rate.empty() && hourly_rate.size() != 24) throw ConfigError("hourly_rate must have 24 entries");
  for (double r : hourly_rate)
    if (!(r >= 0)) throw ConfigError("hourly_rate entries must be nonnegative");
  if (!(target_orders >= 0) || !(intensity_scale >= 0)) throw ConfigError("intensities must be nonnegative");
  if (prep_min_s < 0 || prep_max_s < prep_min_s) throw ConfigError("invalid prep time range");
  if (agent_count < 0 || !(supply_scale >= 0)) throw ConfigError("agent count must be nonnegative");
  if (!(shift_min_h > 0) || shift_max_h < shift_min_h || shift_max_h > 24) throw ConfigError("invalid shift range");
  if (capacity < 1 || capacity > kMaxPlannedOrders) throw ConfigError("capacity must lie in 1..5");
}

std::vector<double> WorkloadConfig::effective_hourly_rate() const {
  std::vector<double> rate = hourly_rate;
  if (rate.empty()) {
    const auto& shape = default_demand_shape();
    const double total = std::accumulate(shape.begin(), shape.end(), 0.0);
    rate.resize(24);
    for (int h = 0; h < 24; ++h) rate[h] = shape[h] * target_orders / total;
  }
  for (double& r : rate) r *= intensity_scale;
  return rate;
}

std::shared_ptr<const RoadNetwork> generate_network(const WorkloadConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed ^ 0x5eed'0001ULL);
  std::uniform_real_distribution<double> jitter(-cfg.speed_jitter, cfg.speed_jitter);

  std::vector<NodeRecord> nodes;
  const double lat_step = cfg.spacing_m / kMetersPerDegree;
  const double lon_step = cfg.spacing_m / (kMetersPerDegree * std::cos(cfg.origin_lat * std::numbers::pi / 180.0));
  for (int r = 0; r < cfg.grid_rows; ++r)
    for (int c = 0; c < cfg.grid_cols; ++c)
      nodes.push_back({r * cfg.grid_cols + c, cfg.origin_lat + r * lat_step, cfg.origin_lon + c * lon_step});

  const auto& shape = default_demand_shape();
  const double peak = *std::max_element(shape.begin(), shape.end());
  std::vector<double> congestion(cfg.bucket_count);
  for (int b = 0; b < cfg.bucket_count; ++b) {
    const int hour = b * 24 / cfg.bucket_count;
    congestion[b] = 1.0 - cfg.congestion_amplitude * shape[hour] / peak;
  }

  std::vector<EdgeRecord> edges;
  auto link = [&](int a, int b) {
    const double base = cfg.base_speed_mps * (1.0 + jitter(rng));
    EdgeRecord e{a, b, cfg.spacing_m, {}};
    for (double f : congestion) e.speeds.push_back(base * f);
    edges.push_back(std::move(e));
  };
  for (int r = 0; r < cfg.grid_rows; ++r) {
    for (int c = 0; c < cfg.grid_cols; ++c) {
      const int id = r * cfg.grid_cols + c;
      if (c + 1 < cfg.grid_cols) {
        link(id, id + 1);
        link(id + 1, id);
      }
      if (r + 1 < cfg.grid_rows) {
        link(id, id + cfg.grid_cols);
        link(id + cfg.grid_cols, id);
      }
    }
  }
  return std::make_shared<const RoadNetwork>(std::move(nodes), std::move(edges), cfg.bucket_count);
}

Workload generate(const WorkloadConfig& cfg) {
  cfg.validate();
  Workload w;
  w.network = generate_network(cfg);
  std::mt19937_64 rng(cfg.seed);
  const int n_nodes = cfg.grid_rows * cfg.grid_cols;

  // Restaurants: Gaussian scatter around cluster centers, snapped to the grid.
  std::uniform_int_distribution<int> any_node(0, n_nodes - 1);
  std::vector<int> centers(cfg.restaurant_clusters);
  for (auto& c : centers) c = any_node(rng);
  std::normal_distribution<double> offset(0.0, cfg.cluster_sigma_m / cfg.spacing_m);
  std::vector<NodeId> restaurants;
  for (int i = 0; i < cfg.restaurant_count; ++i) {
    const int center = centers[i % cfg.restaurant_clusters];
    const int r = std::clamp(static_cast<int>(std::lround(center / cfg.grid_cols + offset(rng))), 0, cfg.grid_rows - 1);
    const int c = std::clamp(static_cast<int>(std::lround(center % cfg.grid_cols + offset(rng))), 0, cfg.grid_cols - 1);
    restaurants.push_back(r * cfg.grid_cols + c);
  }

  // Orders by thinning a homogeneous process at the peak rate.
  const auto rate = cfg.effective_hourly_rate();
  const double max_rate = *std::max_element(rate.begin(), rate.end());
  if (max_rate > 0) {
    std::exponential_distribution<double> gap(max_rate / kSecondsPerHour);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_restaurant(0, restaurants.size() - 1);
    std::uniform_int_distribution<Seconds> prep(cfg.prep_min_s, cfg.prep_max_s);
    OrderId next_id = 1;
    double t = 0.0;
    while (true) {
      t += gap(rng);
      if (t >= kSecondsPerDay) break;
      const int hour = static_cast<int>(t / kSecondsPerHour);
      if (unit(rng) * max_rate >= rate[hour]) continue;
      Order o;
      o.id = next_id++;
      o.placed_at = static_cast<Seconds>(t);
      o.restaurant_node = restaurants[pick_restaurant(rng)];
      do {
        o.customer_node = any_node(rng);
      } while (o.customer_node == o.restaurant_node);
      o.prep_time = prep(rng);
      w.orders.push_back(o);
    }
  }

  // Sessions: the expected number of agents on shift follows the demand profile.
  const int n_agents = static_cast<int>(std::lround(cfg.agent_count * cfg.supply_scale));
  const auto& shape = default_demand_shape();
  const auto& profile = cfg.hourly_rate.empty() ? shape : rate;
  // Sessions stay within the demand's open hours, extended by an hour at the end
  // so late orders can still be delivered.
  const auto first_open = std::find_if(profile.begin(), profile.end(), [](double r) { return r > 0.0; });
  const auto last_open = std::find_if(profile.rbegin(), profile.rend(), [](double r) { return r > 0.0; });
  const Seconds day_start = first_open == profile.end() ? 0 : (first_open - profile.begin()) * kSecondsPerHour;
  const Seconds day_end =
      last_open == profile.rend() ? kSecondsPerDay : (profile.rend() - last_open + 1) * kSecondsPerHour;
  std::vector<double> weights = first_open == profile.end()
                                    ? std::vector<double>(24, 1.0)
                                    : midpoint_weights(profile, day_start, day_end, cfg.shift_min_h, cfg.shift_max_h);
  std::discrete_distribution<int> hour_of(weights.begin(), weights.end());
  std::uniform_real_distribution<double> within_hour(0.0, kSecondsPerHour);
  std::uniform_real_distribution<double> shift_h(cfg.shift_min_h, cfg.shift_max_h);
  std::uniform_int_distribution<int> rating(1, 5);
  for (int i = 0; i < n_agents; ++i) {
    AgentSession s;
    s.id = i + 1;
    const Seconds length = std::lround(shift_h(rng) * kSecondsPerHour);
    const double mid = hour_of(rng) * kSecondsPerHour + within_hour(rng);
    s.login_at = clamp_login(mid, length, day_start, day_end);
    s.logoff_at = s.login_at + length;
    s.login_node = any_node(rng);
    s.capacity = cfg.capacity;
    s.rating = rating(rng);
    w.agents.push_back(s);
  }
  return w;
}

void write_nodes(std::ostream& os, const RoadNetwork& net) {
  os << "id,lat,lon\n";
  for (const auto& n : net.nodes()) os << n.id << ',' << csv::format_double(n.lat) << ',' << csv::format_double(n.lon) << '\n';
}

void write_edges(std::ostream& os, const RoadNetwork& net) {
  os << "src,dst,length_m";
  for (int b = 0; b < net.bucket_count(); ++b) os << ",speed_" << b;
  os << '\n';
  for (const auto& e : net.edges()) {
    os << e.src << ',' << e.dst << ',' << csv::format_double(e.length_m);
    for (double s : e.speeds) os << ',' << csv::format_double(s);
    os << '\n';
  }
}

void write_orders(std::ostream& os, const std::vector<Order>& orders) {
  os << "id,placed_at,restaurant_node,customer_node,prep_s\n";
  for (const auto& o : orders)
    os << o.id << ',' << o.placed_at << ',' << o.restaurant_node << ',' << o.customer_node << ',' << o.prep_time << '\n';
}

void write_agents(std::ostream& os, const std::vector<AgentSession>& agents) {
  os << "id,login_at,logoff_at,login_node,capacity,rating\n";
  for (const auto& a : agents)
    os << a.id << ',' << a.login_at << ',' << a.logoff_at << ',' << a.login_node << ',' << a.capacity << ','
       << a.rating << '\n';
}

std::vector<NodeRecord> read_nodes(std::istream& is, const std::string& name) {
  csv::Reader r(is, name);
  const auto id = r.require("id"), lat = r.require("lat"), lon = r.require("lon");
  std::vector<NodeRecord> out;
  while (r.next()) out.push_back({r.get<NodeId>(id), r.get<double>(lat), r.get<double>(lon)});
  return out;
}

std::vector<EdgeRecord> read_edges(std::istream& is, int& bucket_count, const std::string& name) {
  csv::Reader r(is, name);
  const auto src = r.require("src"), dst = r.require("dst"), len = r.require("length_m");
  std::vector<std::size_t> speed_cols;
  while (r.has("speed_" + std::to_string(speed_cols.size()))) speed_cols.push_back(r.require("speed_" + std::to_string(speed_cols.size())));
  if (speed_cols.empty()) throw DataError(name + ": missing required column 'speed_0'");
  bucket_count = static_cast<int>(speed_cols.size());
  std::vector<EdgeRecord> out;
  while (r.next()) {
    EdgeRecord e{r.get<NodeId>(src), r.get<NodeId>(dst), r.get<double>(len), {}};
    for (auto c : speed_cols) e.speeds.push_back(r.get<double>(c));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Order> read_orders(std::istream& is, const std::string& name) {
  csv::Reader r(is, name);
  const auto id = r.require("id"), placed = r.require("placed_at"), rest = r.require("restaurant_node"),
             cust = r.require("customer_node"), prep = r.require("prep_s");
  std::vector<Order> out;
  while (r.next()) {
    Order o{r.get<OrderId>(id), r.get<Seconds>(placed), r.get<NodeId>(rest), r.get<NodeId>(cust), r.get<Seconds>(prep)};
    if (o.prep_time < 0) r.fail("negative prep_s");
    out.push_back(o);
  }
  return out;
}

std::vector<AgentSession> read_agents(std::istream& is, const std::string& name) {
  csv::Reader r(is, name);
  const auto id = r.require("id"), login = r.require("login_at"), logoff = r.require("logoff_at"),
             node = r.require("login_node"), cap = r.require("capacity");
  const bool has_rating = r.has("rating");
  const auto rating = has_rating ? r.require("rating") : 0;
  std::vector<AgentSession> out;
  while (r.next()) {
    AgentSession s{r.get<AgentId>(id), r.get<Seconds>(login), r.get<Seconds>(logoff), r.get<NodeId>(node),
                   r.get<int>(cap), has_rating ? r.get<int>(rating) : 3};
    if (s.logoff_at <= s.login_at) r.fail("logoff_at must be after login_at");
    if (s.capacity < 1 || s.capacity > kMaxPlannedOrders) r.fail("capacity must lie in 1..5");
    if (s.rating < 1 || s.rating > 5) r.fail("rating must lie in 1..5");
    out.push_back(s);
  }
  return out;
}

namespace {

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw DataError("cannot open " + p.string());
  return is;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

}  // namespace

void save_workload(const Workload& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto os = open_out(dir / "nodes.csv");
    write_nodes(os, *w.network);
  }
  {
    auto os = open_out(dir / "edges.csv");
    write_edges(os, *w.network);
  }
  {
    auto os = open_out(dir / "orders.csv");
    write_orders(os, w.orders);
  }
  auto os = open_out(dir / "agents.csv");
  write_agents(os, w.agents);
}

Workload load_workload(const std::filesystem::path& dir) {
  auto nodes_in = open_in(dir / "nodes.csv");
  auto nodes = read_nodes(nodes_in, (dir / "nodes.csv").string());
  auto edges_in = open_in(dir / "edges.csv");
  int buckets = 0;
  auto edges = read_edges(edges_in, buckets, (dir / "edges.csv").string());
  Workload w;
  w.network = std::make_shared<const RoadNetwork>(std::move(nodes), std::move(edges), buckets);
  auto orders_in = open_in(dir / "orders.csv");
  w.orders = read_orders(orders_in, (dir / "orders.csv").string());
  auto agents_in = open_in(dir / "agents.csv");
  w.agents = read_agents(agents_in, (dir / "agents.csv").string());
  return w;
}

void validate_workload(const Workload& w, const ValidationOptions& opt) {
  if (!w.network) throw DataError("workload has no road network");
  std::unordered_set<OrderId> order_ids;
  for (const auto& o : w.orders) {
    const auto tag = "order " + std::to_string(o.id);
    if (!order_ids.insert(o.id).second) throw DataError("duplicate " + tag);
    if (o.prep_time < 0) throw DataError(tag + ": negative prep time");
    if (!w.network->has_node(o.restaurant_node) || !w.network->has_node(o.customer_node)) {
      throw DataError(tag + ": unknown node");
    }
    if (o.restaurant_node == o.customer_node && !opt.allow_same_node_orders) {
      throw DataError(tag + ": restaurant and customer share a node");
    }
  }
  std::unordered_set<AgentId> agent_ids;
  for (const auto& a : w.agents) {
    const auto tag = "agent " + std::to_string(a.id);
    if (!agent_ids.insert(a.id).second) throw DataError("duplicate " + tag);
    if (a.logoff_at <= a.login_at) throw DataError(tag + ": logoff_at must be after login_at");
    if (a.capacity < 1 || a.capacity > kMaxPlannedOrders) throw DataError(tag + ": capacity must lie in 1..5");
    if (a.rating < 1 || a.rating > 5) throw DataError(tag + ": rating must lie in 1..5");
    if (!w.network->serviced(a.login_node)) throw DataError(tag + ": login node outside the serviced road network");
  }
}

}  // namespace fd
