#include "lapshape/config.hpp"

#include <algorithm>
#include <fstream>

#include "lapshape/error.hpp"
#include "lapshape/hash.hpp"

namespace lapshape {

const char* to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::Hungarian: return "hungarian";
    case DistanceMetric::SortedFrobenius: return "sorted-frobenius";
  }
  return "unknown";
}

DistanceMetric parse_distance_metric(const std::string& name) {
  if (name == "hungarian") return DistanceMetric::Hungarian;
  if (name == "sorted-frobenius") return DistanceMetric::SortedFrobenius;
  throw Error(ErrorCode::InvalidInput, "unknown distance metric '" + name + "'");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be positive");
  };
  require(radius_factor > 0.0, "radius factor");
  require(bandwidth_factor > 0.0, "bandwidth factor");
  require(eig_count > 0, "eigenpair count");
  require(scale_count > 0, "t-scale count");
  require(nu > 0, "nu");
  require(eig_tolerance > 0.0, "eigensolver tolerance");
  if (reference_scale >= scale_count)
    throw Error(ErrorCode::InvalidInput, "reference scale index must be below the t-scale count");
  if (!(cull_fraction >= 0.0 && cull_fraction < 1.0))
    throw Error(ErrorCode::InvalidInput, "cull fraction must be in [0, 1)");
}

double RunConfig::bandwidth(double h) const {
  return std::min(bandwidth_factor * h, 0.5 * radius(h));
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["radius_factor"] = c.radius_factor;
  j["bandwidth_factor"] = c.bandwidth_factor;
  j["eig_count"] = c.eig_count;
  j["scale_count"] = c.scale_count;
  j["reference_scale"] = c.reference_scale;
  j["nu"] = c.nu;
  j["cull_fraction"] = c.cull_fraction;
  j["eig_seed"] = c.eig_seed;
  j["eig_tolerance"] = c.eig_tolerance;
  j["max_kernel_points"] = c.max_kernel_points;
  j["metric"] = to_string(c.metric);
  return j;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "radius_factor") c.radius_factor = value.get<double>();
      else if (key == "bandwidth_factor") c.bandwidth_factor = value.get<double>();
      else if (key == "eig_count") c.eig_count = value.get<std::size_t>();
      else if (key == "scale_count") c.scale_count = value.get<std::size_t>();
      else if (key == "reference_scale") c.reference_scale = value.get<std::size_t>();
      else if (key == "nu") c.nu = value.get<std::size_t>();
      else if (key == "cull_fraction") c.cull_fraction = value.get<double>();
      else if (key == "eig_seed") c.eig_seed = value.get<std::uint64_t>();
      else if (key == "eig_tolerance") c.eig_tolerance = value.get<double>();
      else if (key == "max_kernel_points") c.max_kernel_points = value.get<std::size_t>();
      else if (key == "metric") c.metric = parse_distance_metric(value.get<std::string>());
      else throw Error(ErrorCode::InvalidInput, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
  return config_from_json(j, base);
}

std::string param_fingerprint(const RunConfig& c) {
  nlohmann::ordered_json j = to_json(c);
  // These do not change descriptor values.
  j.erase("max_kernel_points");
  j.erase("metric");
  return sha256_hex(j.dump()).substr(0, 16);
}

}  // namespace lapshape
