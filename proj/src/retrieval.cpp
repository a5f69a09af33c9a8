#include "lapshape/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "lapshape/eigensolver.hpp"
#include "lapshape/error.hpp"
#include "lapshape/hungarian.hpp"
#include "lapshape/laplacian.hpp"
#include "lapshape/segmentation.hpp"

namespace lapshape {

namespace {

Eigen::MatrixXd sorted_rows(const Eigen::MatrixXd& m) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(a, c) != m(b, c)) return m(a, c) > m(b, c);
    return a < b;
  });
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(order[i]);
  return out;
}

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_stage(e, stage);
  }
}

struct Descriptor {
  FeatureVector fv;
  std::vector<PointId> culled;
};

Descriptor describe(const PointCloud& raw, const RunConfig& config, bool cull) {
  const PointCloud cloud = staged("normalize", [&] { return normalize_to_unit_box(raw).cloud; });
  const double h = cloud.spacing();
  const SpclOperator op =
      staged("assemble", [&] { return assemble_spcl(cloud, config.radius(h), config.bandwidth(h)); });
  Descriptor out;
  if (cull) {
    // Outliers are whole nu-graph components; small persistence segments on
    // the surface itself are kept, since dropping them would open holes.
    auto culled = staged("cull", [&] {
      const NeighborGraph graph = nu_graph(op, config.nu);
      const Eigen::VectorXd flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cloud.size()));
      const auto components = persistence_segment(graph, flat, std::numeric_limits<double>::infinity());
      return remove_small_segments(components.segmentation, config.cull_fraction);
    });
    out.culled = std::move(culled.culled);
    if (!out.culled.empty()) return out;
  }
  EigenOptions eopt;
  eopt.seed = config.eig_seed;
  eopt.tolerance = config.eig_tolerance;
  const EigenSystem eigs = staged("eigensolve", [&] { return solve_eigs(op, config.eig_count, eopt); });
  const HksField hks = staged("hks", [&] { return compute_hks(eigs, default_t_scales(eigs, config.scale_count)); });

  const std::size_t ref = config.reference_scale;
  const Eigen::VectorXd column = hks.column(ref);
  Segmentation seg = staged("segment", [&] {
    const auto first = persistence_segment(op, column, config.nu, 0.0);
    const double tau = tau_for_segment_count(first.pairs, config.scale_count);
    return persistence_segment(op, column, config.nu, tau).segmentation;
  });
  seg.reference_scale = hks.t_scales[ref];

  out.fv = staged("feature vector", [&] { return build_feature_vector(hks, seg, config.scale_count); });
  return out;
}

}  // namespace

double fv_distance(const FeatureVector& a, const FeatureVector& b, DistanceMetric metric) {
  if (a.rows.rows() != b.rows.rows() || a.rows.cols() != b.rows.cols())
    throw Error(ErrorCode::InvalidInput, "feature vectors differ in shape");
  if (metric == DistanceMetric::SortedFrobenius) return (sorted_rows(a.rows) - sorted_rows(b.rows)).norm();
  const Eigen::Index m = a.rows.rows();
  Eigen::MatrixXd cost(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) cost(i, j) = (a.rows.row(i) - b.rows.row(j)).norm();
  return hungarian(cost).cost;
}

DescriptorRecord index_model(const PointCloud& cloud, const RunConfig& config, const std::string& model_id,
                             const std::string& source_hash) {
  config.validate();
  Descriptor d = describe(cloud, config, config.cull_fraction > 0.0);
  if (!d.culled.empty()) {
    std::vector<bool> drop(cloud.size(), false);
    for (PointId p : d.culled) drop[p] = true;
    std::vector<Vec3> kept;
    for (PointId p = 0; p < cloud.size(); ++p)
      if (!drop[p]) kept.push_back(cloud[p]);
    if (kept.size() < 4) throw Error(ErrorCode::InvalidInput, "cull: fewer than 4 points survive outlier removal");
    d = describe(PointCloud::from_points(std::move(kept)), config, false);
  }
  DescriptorRecord rec;
  rec.model_id = model_id;
  rec.source_hash = source_hash;
  rec.params = config;
  rec.fingerprint = param_fingerprint(config);
  rec.feature_vector = std::move(d.fv);
  return rec;
}

void DescriptorIndex::add(DescriptorRecord record) {
  if (records_.empty()) {
    fingerprint_ = record.fingerprint;
  } else if (record.fingerprint != fingerprint_) {
    throw Error(ErrorCode::IncompatibleParameters, "record '" + record.model_id + "' has fingerprint " +
                                                       record.fingerprint + ", index has " + fingerprint_);
  }
  records_.push_back(std::move(record));
}

std::vector<Match> retrieve_top_k(const DescriptorIndex& index, const DescriptorRecord& query, std::size_t k,
                                  DistanceMetric metric) {
  if (index.size() > 0 && query.fingerprint != index.fingerprint())
    throw Error(ErrorCode::IncompatibleParameters,
                "query fingerprint " + query.fingerprint + " does not match index " + index.fingerprint());
  if (k > index.size())
    throw Error(ErrorCode::InvalidInput, "requested " + std::to_string(k) + " matches from an index of " +
                                             std::to_string(index.size()));
  std::vector<Match> all;
  all.reserve(index.size());
  for (const auto& r : index.records())
    all.push_back({r.model_id, fv_distance(query.feature_vector, r.feature_vector, metric)});
  std::sort(all.begin(), all.end(), [](const Match& a, const Match& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.model_id < b.model_id;
  });
  all.resize(k);
  return all;
}

double top_k_hit_rate(const DescriptorIndex& index, const std::vector<DescriptorRecord>& queries,
                      const std::map<std::string, std::string>& class_of, std::size_t k, DistanceMetric metric) {
  if (queries.empty()) return 0.0;
  auto class_for = [&](const std::string& id) -> const std::string& {
    const auto it = class_of.find(id);
    if (it == class_of.end()) throw Error(ErrorCode::InvalidInput, "no class label for '" + id + "'");
    return it->second;
  };
  std::size_t hits = 0;
  for (const auto& q : queries) {
    const auto ranked = retrieve_top_k(index, q, index.size(), metric);
    std::size_t seen = 0;
    for (const auto& m : ranked) {
      if (m.model_id == q.model_id) continue;
      if (seen++ == k) break;
      if (class_for(m.model_id) == class_for(q.model_id)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

std::string record_to_json_line(const DescriptorRecord& r) {
  nlohmann::ordered_json j;
  j["model_id"] = r.model_id;
  j["source_hash"] = r.source_hash;
  j["fingerprint"] = r.fingerprint;
  j["params"] = to_json(r.params);
  const auto m = r.feature_vector.rows.rows();
  j["m"] = m;
  j["feature_point_ids"] = r.feature_vector.feature_point_ids;
  std::vector<double> flat;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index c = 0; c < r.feature_vector.rows.cols(); ++c) flat.push_back(r.feature_vector.rows(i, c));
  j["matrix"] = flat;
  return j.dump();
}

DescriptorRecord record_from_json_line(const std::string& line) {
  DescriptorRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.model_id = j.at("model_id").get<std::string>();
    r.source_hash = j.at("source_hash").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.params = config_from_json(j.at("params"));
    const auto m = j.at("m").get<Eigen::Index>();
    const auto flat = j.at("matrix").get<std::vector<double>>();
    if (m < 1 || flat.size() != static_cast<std::size_t>(m * m))
      throw Error(ErrorCode::InvalidInput, "record matrix is not m x m");
    r.feature_vector.rows.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index c = 0; c < m; ++c) r.feature_vector.rows(i, c) = flat[static_cast<std::size_t>(i * m + c)];
    r.feature_vector.feature_point_ids = j.at("feature_point_ids").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed index record: ") + e.what());
  }
  if (r.fingerprint != param_fingerprint(r.params))
    throw Error(ErrorCode::InvalidInput, "record '" + r.model_id + "' fingerprint does not match its params");
  return r;
}

void write_index(const DescriptorIndex& index, const std::string& path, const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << "lapshape-index v1\n";
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& r : index.records()) out << record_to_json_line(r) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

DescriptorIndex read_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "lapshape-index v1")
    throw Error(ErrorCode::UnsupportedFormat, path + ": missing 'lapshape-index v1' header");
  DescriptorIndex index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    try {
      index.add(record_from_json_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return index;
}

}  // namespace lapshape
