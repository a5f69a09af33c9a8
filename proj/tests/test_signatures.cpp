#include <doctest.h>

#include <Eigen/Dense>

#include "lapshape/eigensolver.hpp"
#include "lapshape/error.hpp"
#include "lapshape/laplacian.hpp"
#include "lapshape/segmentation.hpp"
#include "lapshape/signatures.hpp"
#include "lapshape/synthetic.hpp"
#include "support.hpp"

using namespace lapshape;
using namespace testing;

namespace {

struct Spectral {
  SpclOperator op;
  EigenSystem eigs;
};

Spectral spectral(const PointCloud& cloud, std::size_t k) {
  Spectral s{assemble_spcl(cloud, 10.0 * cloud.spacing()), {}};
  s.eigs = solve_eigs(s.op, k);
  return s;
}

const Spectral& sphere_fixture() {
  static const Spectral s = spectral(generate_primitive(PrimitiveKind::Sphere, 2000, 21).cloud, 50);
  return s;
}

}  // namespace

TEST_CASE("default t scales are log spaced between the spectral endpoints") {
  const auto& s = sphere_fixture();
  const auto t = default_t_scales(s.eigs, 15);
  REQUIRE(t.size() == 15);
  const double lo = 4.0 * std::log(10.0) / s.eigs.eigenvalues[49];
  const double hi = 4.0 * std::log(10.0) / s.eigs.eigenvalues[1];
  CHECK(t.front() == doctest::Approx(lo).epsilon(1e-12));
  CHECK(t.back() == doctest::Approx(hi).epsilon(1e-12));
  for (std::size_t i = 2; i < t.size(); ++i)
    CHECK(t[i] / t[i - 1] == doctest::Approx(t[1] / t[0]).epsilon(1e-9));
  CHECK(default_t_scales(s.eigs, 1) == std::vector<double>{t.front()});
}

TEST_CASE("HKS is positive and non-increasing in t") {
  const auto& s = sphere_fixture();
  const auto hks = compute_hks(s.eigs, default_t_scales(s.eigs, 15));
  CHECK(hks.values.minCoeff() > 0.0);
  for (Eigen::Index x = 0; x < hks.values.rows(); ++x)
    for (Eigen::Index c = 1; c < hks.values.cols(); ++c) CHECK(hks.values(x, c) <= hks.values(x, c - 1));
}

TEST_CASE("HKS at very large t is constant") {
  const auto& s = sphere_fixture();
  const auto hks = compute_hks(s.eigs, {1e6 / s.eigs.eigenvalues[1]});
  const Eigen::VectorXd v = hks.column(0);
  CHECK((v.maxCoeff() - v.minCoeff()) / v.mean() <= 1e-6);
}

TEST_CASE("HKS is nearly uniform on the sphere") {
  const auto& s = sphere_fixture();
  const auto hks = compute_hks(s.eigs, default_t_scales(s.eigs, 15));
  for (std::size_t c = 0; c < hks.scales(); ++c) {
    const Eigen::VectorXd v = hks.column(c);
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    CHECK(sd / mean < 0.05);
  }
}

TEST_CASE("HKS is invariant under rigid motion and permutation") {
  const auto lc = generate_primitive(PrimitiveKind::Dumbbell, 1200, 3);
  const auto perm = random_permutation(lc.cloud.size(), 5);
  const auto moved = permute(rigid_transform(lc.cloud, random_rotation(6), Vec3(1, -2, 0.5)), perm);
  const auto a = spectral(lc.cloud, 40), b = spectral(moved, 40);
  const auto t = default_t_scales(a.eigs, 15);
  const auto ha = compute_hks(a.eigs, t), hb = compute_hks(b.eigs, t);
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (Eigen::Index c = 0; c < 15; ++c)
      CHECK(relative_error(hb.values(static_cast<Eigen::Index>(i), c),
                           ha.values(static_cast<Eigen::Index>(perm[i]), c)) <= 1e-6);
}

TEST_CASE("heat kernel matrix") {
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 600, 2);
  const auto s = spectral(lc.cloud, 30);
  const double t = default_t_scales(s.eigs, 15)[3];
  const auto K = compute_heat_kernel(s.eigs, t);
  const auto hks = compute_hks(s.eigs, {t});
  CHECK((K.entries - K.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((K.entries.diagonal() - hks.column(0)).cwiseAbs().maxCoeff() <= 1e-12);

  // Heat is conserved: sum_y k_t(x, y) B_y = 1.
  const Eigen::VectorXd row_mass = K.entries * s.op.mass;
  CHECK((row_mass.array() - 1.0).abs().maxCoeff() <= 1e-6);

  try {
    compute_heat_kernel(s.eigs, t, 100);
    FAIL("expected memory guard");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MemoryGuard);
  }
  CHECK(compute_heat_kernel(s.eigs, t, 0).entries.rows() == 600);
}

TEST_CASE("feature vector shape and normalization") {
  const auto& s = sphere_fixture();
  const auto hks = compute_hks(s.eigs, default_t_scales(s.eigs, 15));
  const auto first = persistence_segment(s.op, hks.column(0), 10, 0.0);
  auto seg = persistence_segment(s.op, hks.column(0), 10, tau_for_segment_count(first.pairs, 15)).segmentation;
  seg.reference_scale = hks.t_scales[0];
  const auto fv = build_feature_vector(hks, seg, 15);
  CHECK(fv.rows.rows() == 15);
  CHECK(fv.rows.cols() == 15);
  CHECK(fv.rows.maxCoeff() == 1.0);
  CHECK(fv.rows.minCoeff() > 0.0);
  REQUIRE(fv.feature_point_ids.size() == 15);
  std::vector<int> seen(15, 0);
  for (std::size_t id : fv.feature_point_ids) ++seen[static_cast<std::size_t>(seg.labels[id])];
  for (int c : seen) CHECK(c == 1);
  for (std::size_t r = 1; r < 15; ++r)
    CHECK(hks.values(static_cast<Eigen::Index>(fv.feature_point_ids[r]), 0) <=
          hks.values(static_cast<Eigen::Index>(fv.feature_point_ids[r - 1]), 0));
}
