#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lapshape/config.hpp"
#include "lapshape/point_cloud.hpp"
#include "lapshape/signatures.hpp"

namespace lapshape {

// Sum of per-row L2 distances under the cheapest row matching (Hungarian),
// or the Frobenius distance after sorting rows lexicographically.
double fv_distance(const FeatureVector& a, const FeatureVector& b,
                   DistanceMetric metric = DistanceMetric::Hungarian);

struct DescriptorRecord {
  std::string model_id;
  std::string source_hash;  // SHA-256 of the source file, empty for in-memory clouds
  RunConfig params;
  std::string fingerprint;
  FeatureVector feature_vector;
};

// normalize -> assemble -> eigs -> HKS -> persistence at m segments. A
// pre-pass drops nu-graph components smaller than the cull fraction and
// reruns on the cleaned cloud. Errors carry the failing stage in their message.
DescriptorRecord index_model(const PointCloud& cloud, const RunConfig& config, const std::string& model_id,
                             const std::string& source_hash = {});

class DescriptorIndex {
 public:
  // Throws IncompatibleParameters when the fingerprint differs from the
  // records already present.
  void add(DescriptorRecord record);

  const std::vector<DescriptorRecord>& records() const { return records_; }
  const std::string& fingerprint() const { return fingerprint_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<DescriptorRecord> records_;
  std::string fingerprint_;
};

struct Match {
  std::string model_id;
  double score = 0.0;
};

// The k best matches, ascending score, ties by model id.
std::vector<Match> retrieve_top_k(const DescriptorIndex& index, const DescriptorRecord& query, std::size_t k,
                                  DistanceMetric metric = DistanceMetric::Hungarian);

// Fraction of queries whose top k, excluding records with the query's own
// model id, contains a model of the same class.
double top_k_hit_rate(const DescriptorIndex& index, const std::vector<DescriptorRecord>& queries,
                      const std::map<std::string, std::string>& class_of, std::size_t k,
                      DistanceMetric metric = DistanceMetric::Hungarian);

// Index file: the line "lapshape-index v1", optional "# " comment lines, then
// one JSON record per line.
void write_index(const DescriptorIndex& index, const std::string& path,
                 const std::vector<std::string>& comments = {});
DescriptorIndex read_index(const std::string& path);
std::string record_to_json_line(const DescriptorRecord& record);
DescriptorRecord record_from_json_line(const std::string& line);

}  // namespace lapshape
