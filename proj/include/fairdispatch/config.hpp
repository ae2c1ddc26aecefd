#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairdispatch/engine.hpp"
#include "fairdispatch/workload.hpp"
#include "json.hpp"

namespace fd {

using Json = nlohmann::ordered_json;

/// Simulation settings as read from JSON. The GPR model is referenced by path
/// and loaded by the caller.
struct SimSettings {
  SimConfig sim;
  std::optional<std::string> model_path;
};

Json to_json(const SimSettings& s);
Json to_json(const WorkloadConfig& c);

/// Strict parsing: unknown keys and wrong types raise ConfigError.
SimSettings sim_settings_from_json(const Json& j);
WorkloadConfig workload_config_from_json(const Json& j);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(Json& doc, const std::string& assignment);

/// Layers defaults, an optional config file, then overrides (last wins).
Json layered_config(const Json& defaults, const std::optional<std::string>& file,
                    const std::vector<std::string>& overrides);

Json read_json_file(const std::string& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace fd
