#include "fairdispatch/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fd {

namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.contains(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

Json to_json(const SimSettings& s) {
  const auto& c = s.sim;
  Json j;
  j["window_seconds"] = c.window_seconds;
  j["sla_seconds"] = c.sla_seconds;
  j["lambda"] = c.lambda;
  j["matching"] = to_string(c.matching);
  j["seed"] = c.seed;
  j["capacity"] = c.capacity_override ? Json(*c.capacity_override) : Json(nullptr);
  j["gpr_uses_rating"] = c.gpr_uses_rating;
  j["allow_same_node_orders"] = c.allow_same_node_orders;
  j["policy"] = {{"mode", to_string(c.policy.mode)},
                 {"g", c.policy.g},
                 {"omega", c.policy.omega},
                 {"rejection", c.policy.rejection_enabled},
                 {"baseline_g", c.policy.baseline_g},
                 {"model", s.model_path ? Json(*s.model_path) : Json(nullptr)}};
  j["cost"] = {{"pay_rate", c.cost.pay_rate},
               {"min_wage", c.cost.min_wage},
               {"co2_grams_per_km", c.cost.co2_grams_per_km}};
  j["batching"] = {{"max_batch_size", c.batching.max_batch_size}, {"max_batch_xdt", c.batching.max_batch_xdt}};
  return j;
}

SimSettings sim_settings_from_json(const Json& j) {
  check_keys(j, "config", {"window_seconds", "sla_seconds", "lambda", "matching", "seed", "capacity",
                           "gpr_uses_rating", "allow_same_node_orders", "policy", "cost", "batching"});
  SimSettings s;
  auto& c = s.sim;
  read(j, "window_seconds", c.window_seconds, "config");
  read(j, "sla_seconds", c.sla_seconds, "config");
  read(j, "lambda", c.lambda, "config");
  read(j, "seed", c.seed, "config");
  read(j, "gpr_uses_rating", c.gpr_uses_rating, "config");
  read(j, "allow_same_node_orders", c.allow_same_node_orders, "config");
  if (j.contains("matching")) {
    std::string m;
    read(j, "matching", m, "config");
    c.matching = matching_mode_from_string(m);
  }
  if (j.contains("capacity") && !j.at("capacity").is_null()) {
    int cap = 0;
    read(j, "capacity", cap, "config");
    c.capacity_override = cap;
  }
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    check_keys(p, "policy", {"mode", "g", "omega", "rejection", "baseline_g", "model"});
    if (p.contains("mode")) {
      std::string m;
      read(p, "mode", m, "policy");
      c.policy.mode = guarantee_mode_from_string(m);
    }
    read(p, "g", c.policy.g, "policy");
    read(p, "omega", c.policy.omega, "policy");
    read(p, "rejection", c.policy.rejection_enabled, "policy");
    read(p, "baseline_g", c.policy.baseline_g, "policy");
    if (p.contains("model") && !p.at("model").is_null()) {
      std::string path;
      read(p, "model", path, "policy");
      s.model_path = path;
    }
  }
  if (j.contains("cost")) {
    const auto& p = j.at("cost");
    check_keys(p, "cost", {"pay_rate", "min_wage", "co2_grams_per_km"});
    read(p, "pay_rate", c.cost.pay_rate, "cost");
    read(p, "min_wage", c.cost.min_wage, "cost");
    read(p, "co2_grams_per_km", c.cost.co2_grams_per_km, "cost");
  }
  if (j.contains("batching")) {
    const auto& p = j.at("batching");
    check_keys(p, "batching", {"max_batch_size", "max_batch_xdt"});
    read(p, "max_batch_size", c.batching.max_batch_size, "batching");
    read(p, "max_batch_xdt", c.batching.max_batch_xdt, "batching");
  }
  return s;
}

Json to_json(const WorkloadConfig& c) {
  Json j;
  j["grid_rows"] = c.grid_rows;
  j["grid_cols"] = c.grid_cols;
  j["spacing_m"] = c.spacing_m;
  j["origin_lat"] = c.origin_lat;
  j["origin_lon"] = c.origin_lon;
  j["base_speed_mps"] = c.base_speed_mps;
  j["speed_jitter"] = c.speed_jitter;
  j["congestion_amplitude"] = c.congestion_amplitude;
  j["bucket_count"] = c.bucket_count;
  j["restaurant_count"] = c.restaurant_count;
  j["restaurant_clusters"] = c.restaurant_clusters;
  j["cluster_sigma_m"] = c.cluster_sigma_m;
  j["hourly_rate"] = c.hourly_rate;
  j["target_orders"] = c.target_orders;
  j["intensity_scale"] = c.intensity_scale;
  j["prep_min_s"] = c.prep_min_s;
  j["prep_max_s"] = c.prep_max_s;
  j["agent_count"] = c.agent_count;
  j["supply_scale"] = c.supply_scale;
  j["shift_min_h"] = c.shift_min_h;
  j["shift_max_h"] = c.shift_max_h;
  j["capacity"] = c.capacity;
  j["seed"] = c.seed;
  return j;
}

WorkloadConfig workload_config_from_json(const Json& j) {
  check_keys(j, "workload", {"grid_rows", "grid_cols", "spacing_m", "origin_lat", "origin_lon", "base_speed_mps",
                             "speed_jitter", "congestion_amplitude", "bucket_count", "restaurant_count",
                             "restaurant_clusters", "cluster_sigma_m", "hourly_rate", "target_orders",
                             "intensity_scale", "prep_min_s", "prep_max_s", "agent_count", "supply_scale",
                             "shift_min_h", "shift_max_h", "capacity", "seed"});
  WorkloadConfig c;
  const std::string w = "workload";
  read(j, "grid_rows", c.grid_rows, w);
  read(j, "grid_cols", c.grid_cols, w);
  read(j, "spacing_m", c.spacing_m, w);
  read(j, "origin_lat", c.origin_lat, w);
  read(j, "origin_lon", c.origin_lon, w);
  read(j, "base_speed_mps", c.base_speed_mps, w);
  read(j, "speed_jitter", c.speed_jitter, w);
  read(j, "congestion_amplitude", c.congestion_amplitude, w);
  read(j, "bucket_count", c.bucket_count, w);
  read(j, "restaurant_count", c.restaurant_count, w);
  read(j, "restaurant_clusters", c.restaurant_clusters, w);
  read(j, "cluster_sigma_m", c.cluster_sigma_m, w);
  read(j, "hourly_rate", c.hourly_rate, w);
  read(j, "target_orders", c.target_orders, w);
  read(j, "intensity_scale", c.intensity_scale, w);
  read(j, "prep_min_s", c.prep_min_s, w);
  read(j, "prep_max_s", c.prep_max_s, w);
  read(j, "agent_count", c.agent_count, w);
  read(j, "supply_scale", c.supply_scale, w);
  read(j, "shift_min_h", c.shift_min_h, w);
  read(j, "shift_max_h", c.shift_max_h, w);
  read(j, "capacity", c.capacity, w);
  read(j, "seed", c.seed, w);
  return c;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = Json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Json layered_config(const Json& defaults, const std::optional<std::string>& file,
                    const std::vector<std::string>& overrides) {
  Json doc = defaults;
  if (file) {
    const Json f = read_json_file(*file);
    if (!f.is_object()) throw ConfigError(*file + ": top level must be an object");
    for (const auto& [k, v] : f.items()) {
      if (v.is_object() && doc.contains(k) && doc[k].is_object()) {
        for (const auto& [k2, v2] : v.items()) doc[k][k2] = v2;
      } else {
        doc[k] = v;
      }
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fd
