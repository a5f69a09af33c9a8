#include <doctest.h>

#include <algorithm>
#include <set>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lapshape/eigensolver.hpp"
#include "lapshape/error.hpp"
#include "lapshape/laplacian.hpp"
#include "lapshape/segmentation.hpp"
#include "lapshape/synthetic.hpp"
#include "support.hpp"

using namespace lapshape;
using namespace testing;

namespace {

void check_operator_invariants(const SpclOperator& op) {
  const Eigen::MatrixXd W(op.stiffness);
  CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(op.mass.minCoeff() > 0.0);
  CHECK(max_relative_row_sum(op) <= 1e-10);
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    CHECK(W(i, i) >= 0.0);
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      if (i != j && W(i, j) > 0.0) FAIL("positive off-diagonal at " << i << "," << j);
  }
}

Eigen::VectorXd dense_spectrum(const SpclOperator& op) {
  const Eigen::MatrixXd W(op.stiffness);
  const Eigen::MatrixXd B = op.mass.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(W, B, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

TEST_CASE("assembled operator invariants on small fixtures") {
  for (auto kind : {PrimitiveKind::Sphere, PrimitiveKind::CubeSurface, PrimitiveKind::Dumbbell}) {
    const auto lc = generate_primitive(kind, 400, 1);
    const double h = lc.cloud.spacing();
    check_operator_invariants(assemble_spcl(lc.cloud, 3.0 * h));
  }
}

TEST_CASE("equilateral triangle matches the closed-form row") {
  const double s = 1.3, eps = 0.7;
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(s, 0, 0), Vec3(s / 2, s * std::sqrt(3.0) / 2, 0)};
  const auto op = assemble_spcl(PointCloud::from_points(pts), 2.0 * s, eps);
  const double area = std::sqrt(3.0) / 4.0 * s * s;
  const double scale = 4.0 / (M_PI * std::pow(2.0 * eps, 4));
  const double w = -scale * area * area / 9.0 * std::exp(-s * s / (4.0 * eps * eps));
  const Eigen::MatrixXd W(op.stiffness);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) CHECK(W(i, i) == doctest::Approx(-2.0 * w).epsilon(1e-13));
      else CHECK(W(i, j) == doctest::Approx(w).epsilon(1e-13));
    }
    CHECK(op.mass[i] == doctest::Approx(area / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("operator entries are rotation invariant") {
  const auto lc = generate_primitive(PrimitiveKind::Cylinder, 600, 3);
  const double h = lc.cloud.spacing();
  const auto a = assemble_spcl(lc.cloud, 4.0 * h);
  const auto b = assemble_spcl(rigid_transform(lc.cloud, random_rotation(2), Vec3(-3, 1, 4)), 4.0 * h);
  const Eigen::MatrixXd Wa(a.stiffness), Wb(b.stiffness);
  const double scale = Wa.cwiseAbs().maxCoeff();
  CHECK((Wa - Wb).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  CHECK((a.mass - b.mass).cwiseAbs().maxCoeff() <= 1e-9 * a.mass.maxCoeff());
}

TEST_CASE("insufficient sampling lists every failing point") {
  auto pts = grid_points(6, 6, 0.1);
  pts.push_back(Vec3(10, 10, 10));
  pts.push_back(Vec3(-10, 10, 10));
  try {
    assemble_spcl(PointCloud::from_points(pts), 0.25);
    FAIL("expected insufficient sampling");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSampling);
    CHECK(e.ids() == std::vector<std::int64_t>{36, 37});
  }
}

TEST_CASE("eigensolver agrees with a dense generalized solve") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto lc = generate_primitive(seed == 2 ? PrimitiveKind::CubeSurface : PrimitiveKind::Sphere, 250, seed);
    const auto op = assemble_spcl(lc.cloud, 3.0 * lc.cloud.spacing());
    const std::size_t k = 40;
    const auto es = solve_eigs(op, k);
    const auto dense = dense_spectrum(op);
    const double top = dense[dense.size() - 1];
    CHECK(std::abs(es.eigenvalues[0]) <= 1e-8 * top);
    for (std::size_t i = 1; i < k; ++i) CHECK(relative_error(es.eigenvalues[i], dense[i]) <= 1e-6);
  }
}

TEST_CASE("eigenvectors are B-orthonormal and eigenvalues ascend") {
  const auto lc = generate_primitive(PrimitiveKind::Dumbbell, 800, 4);
  const auto op = assemble_spcl(lc.cloud, 3.0 * lc.cloud.spacing());
  const auto es = solve_eigs(op, 25);
  const Eigen::MatrixXd G = es.eigenvectors.transpose() * op.mass.asDiagonal() * es.eigenvectors;
  CHECK((G - Eigen::MatrixXd::Identity(25, 25)).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index i = 1; i < 25; ++i) CHECK(es.eigenvalues[i] >= es.eigenvalues[i - 1]);
  CHECK(es.min_unclamped >= -1e-8 * es.eigenvalues[24]);
  const Eigen::MatrixXd W(op.stiffness);
  const Eigen::MatrixXd residual =
      W * es.eigenvectors - op.mass.asDiagonal() * es.eigenvectors * es.eigenvalues.asDiagonal();
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-6 * W.cwiseAbs().maxCoeff());
}

TEST_CASE("k = 1 returns the constant null vector") {
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 500, 8);
  const auto es = solve_eigs(assemble_spcl(lc.cloud, 3.0 * lc.cloud.spacing()), 1);
  CHECK(es.eigenvalues[0] == 0.0);
  const Eigen::VectorXd phi = es.eigenvectors.col(0);
  CHECK((phi.maxCoeff() - phi.minCoeff()) / std::abs(phi.mean()) <= 1e-6);
}

TEST_CASE("k out of range is invalid input") {
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 200, 8);
  const auto op = assemble_spcl(lc.cloud, 3.0 * lc.cloud.spacing());
  for (std::size_t k : {std::size_t{0}, op.size()}) {
    try {
      solve_eigs(op, k);
      FAIL("expected invalid input");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidInput);
    }
  }
}

TEST_CASE("spectrum is invariant under rigid motion and permutation") {
  const auto lc = generate_primitive(PrimitiveKind::CubeSurface, 900, 5);
  const double h = lc.cloud.spacing();
  const auto moved = permute(rigid_transform(lc.cloud, random_rotation(3), Vec3(2, 2, 2)),
                             random_permutation(lc.cloud.size(), 4));
  const auto a = solve_eigs(assemble_spcl(lc.cloud, 4.0 * h), 20);
  const auto b = solve_eigs(assemble_spcl(moved, 4.0 * h), 20);
  for (Eigen::Index i = 1; i < 20; ++i) CHECK(relative_error(b.eigenvalues[i], a.eigenvalues[i]) <= 1e-6);
}

TEST_CASE("normalized spectrum is invariant under uniform scaling") {
  const auto lc = generate_primitive(PrimitiveKind::Cylinder, 700, 6);
  const auto scaled = rigid_transform(lc.cloud, 17.0 * Eigen::Matrix3d::Identity(), Vec3::Zero());
  auto spectrum = [](const PointCloud& c) {
    const auto n = normalize_to_unit_box(c).cloud;
    return solve_eigs(assemble_spcl(n, 4.0 * n.spacing()), 15).eigenvalues;
  };
  const auto a = spectrum(lc.cloud), b = spectrum(scaled);
  for (Eigen::Index i = 1; i < 15; ++i) CHECK(relative_error(b[i], a[i]) <= 1e-6);
}

TEST_CASE("row_neighbors ordering, symmetry and the nu restriction") {
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 600, 9);
  const auto op = assemble_spcl(lc.cloud, 4.0 * lc.cloud.spacing());
  std::vector<std::set<PointId>> members(op.size());
  for (PointId i = 0; i < op.size(); ++i) {
    const auto row = row_neighbors(op, i);
    for (std::size_t a = 1; a < row.size(); ++a) {
      const double prev = std::abs(row[a - 1].second), cur = std::abs(row[a].second);
      CHECK((prev > cur || (prev == cur && row[a - 1].first < row[a].first)));
    }
    for (const auto& [j, w] : row) members[i].insert(j);
  }
  for (PointId i = 0; i < op.size(); ++i)
    for (PointId j : members[i]) CHECK(members[j].count(i) == 1);

  const auto graph = nu_graph(op, 10);
  for (PointId i = 0; i < op.size(); ++i) {
    std::set<PointId> expect;
    auto top = row_neighbors(op, i);
    top.resize(std::min<std::size_t>(10, top.size()));
    for (const auto& e : top) expect.insert(e.first);
    for (PointId j = 0; j < op.size(); ++j) {
      if (j == i) continue;
      auto other = row_neighbors(op, j);
      other.resize(std::min<std::size_t>(10, other.size()));
      for (const auto& e : other)
        if (e.first == i) expect.insert(j);
    }
    const std::set<PointId> got(graph[i].begin(), graph[i].end());
    CHECK(got == expect);
  }
}

TEST_CASE("ring estimate on three weight classes") {
  SparseMatrix W(7, 7);
  std::vector<Eigen::Triplet<double>> t;
  const double w[6] = {-4, -4, -2, -2, -1, -1};
  for (int j = 1; j <= 6; ++j) {
    t.emplace_back(0, j, w[j - 1]);
    t.emplace_back(j, 0, w[j - 1]);
    t.emplace_back(j, j, -w[j - 1]);
  }
  t.emplace_back(0, 0, 14.0);
  W.setFromTriplets(t.begin(), t.end());
  SpclOperator op;
  op.stiffness = W;
  op.mass = Eigen::VectorXd::Ones(7);
  const auto re = ring_estimate(op, 0);
  CHECK(!re.degenerate);
  CHECK(re.rings[0] == std::vector<PointId>{1, 2});
  CHECK(re.rings[1] == std::vector<PointId>{1, 2, 3, 4});
  CHECK(re.rings[2] == std::vector<PointId>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("ring estimate nesting and the grid one-ring") {
  const auto cloud = PointCloud::from_points(grid_points(11, 11));
  const auto op = assemble_spcl(cloud, 2.1);
  const auto re = ring_estimate(op, 60);
  std::vector<PointId> inner = re.rings[0];
  std::sort(inner.begin(), inner.end());
  CHECK(inner == std::vector<PointId>{49, 59, 61, 71});

  const auto lc = generate_primitive(PrimitiveKind::Sphere, 500, 1);
  const auto sop = assemble_spcl(lc.cloud, 4.0 * lc.cloud.spacing());
  for (PointId i = 0; i < sop.size(); i += 17) {
    const auto r = ring_estimate(sop, i);
    std::set<PointId> a(r.rings[0].begin(), r.rings[0].end()), b(r.rings[1].begin(), r.rings[1].end()),
        c(r.rings[2].begin(), r.rings[2].end());
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    CHECK(std::includes(c.begin(), c.end(), b.begin(), b.end()));
    CHECK(c.size() == row_neighbors(sop, i).size());
  }
}
