#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "lapshape/error.hpp"
#include "lapshape/hungarian.hpp"
#include "lapshape/retrieval.hpp"
#include "lapshape/synthetic.hpp"
#include "support.hpp"

using namespace lapshape;
using namespace testing;

namespace {

FeatureVector random_fv(Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  FeatureVector fv;
  fv.rows.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) fv.rows(i, j) = u(rng);
  fv.rows /= fv.rows.maxCoeff();
  fv.feature_point_ids.resize(static_cast<std::size_t>(m));
  std::iota(fv.feature_point_ids.begin(), fv.feature_point_ids.end(), 0);
  return fv;
}

DescriptorRecord record(const std::string& id, FeatureVector fv, const RunConfig& cfg = {}) {
  DescriptorRecord r;
  r.model_id = id;
  r.params = cfg;
  r.fingerprint = param_fingerprint(cfg);
  r.feature_vector = std::move(fv);
  return r;
}

double brute_matching(const FeatureVector& a, const FeatureVector& b) {
  std::vector<int> perm(static_cast<std::size_t>(a.rows.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      cost += (a.rows.row(static_cast<Eigen::Index>(i)) - b.rows.row(perm[i])).norm();
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.eig_count = 30;
  cfg.scale_count = 6;
  return cfg;
}

}  // namespace

TEST_CASE("Hungarian assignment matches exhaustive search") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd c(6, 6);
    for (auto& x : c.reshaped()) x = u(rng);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double s = 0.0;
      for (int i = 0; i < 6; ++i) s += c(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto a = hungarian(c);
    CHECK(a.cost == doctest::Approx(best).epsilon(1e-12));
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += c(i, a.row_to_col[static_cast<std::size_t>(i)]);
    CHECK(s == doctest::Approx(a.cost).epsilon(1e-12));
  }
}

TEST_CASE("fv_distance identities") {
  const auto a = random_fv(8, 1);
  CHECK(fv_distance(a, a) == 0.0);
  FeatureVector p = a;
  const std::vector<int> order{3, 0, 7, 5, 1, 2, 6, 4};
  for (int i = 0; i < 8; ++i) p.rows.row(i) = a.rows.row(order[static_cast<std::size_t>(i)]);
  CHECK(fv_distance(a, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(fv_distance(a, p, DistanceMetric::SortedFrobenius) == 0.0);
  CHECK_THROWS_AS(fv_distance(a, random_fv(7, 2)), Error);
}

TEST_CASE("fv_distance on 3x3 equals the best of all 3! matchings") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const auto a = random_fv(3, seed), b = random_fv(3, seed + 100);
    CHECK(fv_distance(a, b) == doctest::Approx(brute_matching(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("fv_distance behaves as a pseudometric on sampled triples") {
  std::vector<FeatureVector> fvs;
  for (std::uint64_t s = 0; s < 8; ++s) fvs.push_back(random_fv(5, s));
  for (const auto& a : fvs)
    for (const auto& b : fvs) {
      CHECK(fv_distance(a, b) >= 0.0);
      CHECK(fv_distance(a, b) == doctest::Approx(fv_distance(b, a)).epsilon(1e-12));
      for (const auto& c : fvs) CHECK(fv_distance(a, c) <= fv_distance(a, b) + fv_distance(b, c) + 1e-12);
    }
}

TEST_CASE("index enforces a single parameter fingerprint") {
  DescriptorIndex index;
  index.add(record("a", random_fv(4, 1)));
  RunConfig other;
  other.nu = 7;
  try {
    index.add(record("b", random_fv(4, 2), other));
    FAIL("expected incompatible parameters");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleParameters);
  }
  CHECK_THROWS_AS(retrieve_top_k(index, record("q", random_fv(4, 3), other), 1), Error);
}

TEST_CASE("fingerprint ignores parameters that do not change descriptors") {
  RunConfig a, b;
  b.max_kernel_points = 5;
  b.metric = DistanceMetric::SortedFrobenius;
  CHECK(param_fingerprint(a) == param_fingerprint(b));
  b.eig_count = 12;
  CHECK(param_fingerprint(a) != param_fingerprint(b));
}

TEST_CASE("retrieve_top_k ranking rules") {
  DescriptorIndex index;
  for (std::uint64_t s = 0; s < 6; ++s) index.add(record("m" + std::to_string(5 - s), random_fv(4, s)));
  index.add(record("dup", index.records()[2].feature_vector));
  const auto& q = index.records()[2];
  const auto top = retrieve_top_k(index, q, 3);
  CHECK(top[0].score == 0.0);
  CHECK(top[1].score == 0.0);
  CHECK(top[0].model_id == "dup");  // score ties go to the lexicographically smaller id
  CHECK(top[1].model_id == q.model_id);

  const auto all = retrieve_top_k(index, q, index.size());
  std::vector<std::string> ids, expect;
  for (const auto& m : all) ids.push_back(m.model_id);
  for (const auto& r : index.records()) expect.push_back(r.model_id);
  std::sort(ids.begin(), ids.end());
  std::sort(expect.begin(), expect.end());
  CHECK(ids == expect);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i].score >= all[i - 1].score);
  CHECK_THROWS_AS(retrieve_top_k(index, q, index.size() + 1), Error);
}

TEST_CASE("top-k hit rate") {
  DescriptorIndex index;
  std::map<std::string, std::string> cls;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const std::string id = "m" + std::to_string(s);
    index.add(record(id, random_fv(4, s)));
    cls[id] = s % 2 ? "odd" : "even";
  }
  CHECK(top_k_hit_rate(index, index.records(), cls, index.size() - 1) == 1.0);
  std::map<std::string, std::string> single;
  for (const auto& [id, c] : cls) single[id] = "all";
  CHECK(top_k_hit_rate(index, index.records(), single, 1) == 1.0);
}

TEST_CASE("index_model is deterministic and rotation stable") {
  const auto cfg = small_config();
  const auto lc = generate_primitive(PrimitiveKind::Cylinder, 1200, 4);
  const auto a = index_model(lc.cloud, cfg, "cyl");
  const auto b = index_model(lc.cloud, cfg, "cyl");
  CHECK(record_to_json_line(a) == record_to_json_line(b));
  CHECK(a.feature_vector.rows.rows() == 6);
  const auto rotated = index_model(rigid_transform(lc.cloud, random_rotation(5), Vec3(3, 3, 3)),
                                   cfg, "cyl-rot");
  CHECK(fv_distance(a.feature_vector, rotated.feature_vector) < 1e-3);
}

TEST_CASE("outlier components are culled before describing") {
  auto cfg = small_config();
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 1500, 3);
  std::vector<Vec3> pts(lc.cloud.points().begin(), lc.cloud.points().end());
  const double h = lc.cloud.spacing();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) pts.push_back(Vec3(3.0 + i * h, j * h, 0.1 * i * j * h));
  const auto with_blob = index_model(PointCloud::from_points(pts), cfg, "blob");
  const auto clean = index_model(lc.cloud, cfg, "clean");
  CHECK(fv_distance(with_blob.feature_vector, clean.feature_vector) < 1e-6);
}

TEST_CASE("pipeline errors carry the stage") {
  auto pts = grid_points(5, 5, 0.1);
  pts.push_back(Vec3(100, 100, 100));
  try {
    index_model(PointCloud::from_points(pts), small_config(), "bad");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("assemble") != std::string::npos);
  }
}

TEST_CASE("index file round trip is bit exact") {
  const auto dir = scratch_dir("index");
  DescriptorIndex index;
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto r = record("model-" + std::to_string(s), random_fv(5, s));
    r.source_hash = std::string(64, static_cast<char>('a' + s));
    index.add(r);
  }
  write_index(index, (dir / "a.idx").string(), {"written by the tests"});
  const auto back = read_index((dir / "a.idx").string());
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back.records()[i].feature_vector.rows == index.records()[i].feature_vector.rows);
    CHECK(back.records()[i].source_hash == index.records()[i].source_hash);
  }
  write_index(back, (dir / "b.idx").string(), {"written by the tests"});
  CHECK(slurp(dir / "a.idx") == slurp(dir / "b.idx"));

  spit(dir / "bad.idx", "not an index\n");
  try {
    read_index((dir / "bad.idx").string());
    FAIL("expected unsupported format");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedFormat);
  }
}
