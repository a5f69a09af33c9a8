#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace lapshape {

enum class DistanceMetric { Hungarian, SortedFrobenius };

const char* to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(const std::string& name);

// Every tunable of a pipeline run. Serialized into provenance blocks and
// descriptor records so a run can be reproduced from its outputs.
struct RunConfig {
  double radius_factor = 10.0;    // r = radius_factor * h
  double bandwidth_factor = 1.5;  // eps = min(bandwidth_factor * h, r / 2)
  std::size_t eig_count = 300;
  std::size_t scale_count = 15;
  // Which default t-scale drives segmentation and feature points.
  std::size_t reference_scale = 0;
  std::size_t nu = 10;
  double cull_fraction = 0.01;
  std::uint64_t eig_seed = 0x5eedULL;
  double eig_tolerance = 1e-10;
  std::size_t max_kernel_points = 20000;
  DistanceMetric metric = DistanceMetric::Hungarian;

  void validate() const;
  double radius(double h) const { return radius_factor * h; }
  double bandwidth(double h) const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Hash of the parameters that change descriptor values.
std::string param_fingerprint(const RunConfig& config);

}  // namespace lapshape
