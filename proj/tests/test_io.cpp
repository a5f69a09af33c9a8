#include <doctest.h>

#include <cstring>
#include <functional>

#include "lapshape/config.hpp"
#include "lapshape/error.hpp"
#include "lapshape/hash.hpp"
#include "lapshape/io.hpp"
#include "lapshape/laplacian.hpp"
#include "lapshape/synthetic.hpp"
#include "support.hpp"

using namespace lapshape;
using namespace testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoFailure;
}

void write_binary_stl(const std::filesystem::path& path, const std::vector<std::array<Vec3, 3>>& tris) {
  std::string bytes(80, '\0');
  const auto count = static_cast<std::uint32_t>(tris.size());
  bytes.append(reinterpret_cast<const char*>(&count), 4);
  for (const auto& t : tris) {
    float rec[12] = {0, 0, 0};
    for (int v = 0; v < 3; ++v)
      for (int c = 0; c < 3; ++c) rec[3 + 3 * v + c] = static_cast<float>(t[static_cast<std::size_t>(v)][c]);
    bytes.append(reinterpret_cast<const char*>(rec), sizeof(rec));
    bytes.append(2, '\0');
  }
  spit(path, bytes);
}

}  // namespace

TEST_CASE("xyz: three points are too few") {
  const auto dir = scratch_dir("xyz_few");
  spit(dir / "tri.xyz", "0 0 0\n1 0 0\n0 1 0\n");
  CHECK(read_xyz_points((dir / "tri.xyz").string()).size() == 3);
  CHECK(code_of([&] { read_xyz((dir / "tri.xyz").string()); }) == ErrorCode::InvalidInput);
}

TEST_CASE("xyz: CRLF, trailing spaces, comments and extra columns") {
  const auto dir = scratch_dir("xyz_crlf");
  spit(dir / "lf.xyz", "# header\n0 0 0\n1 0 0\n\n0 1 0\n0 0 1\n");
  spit(dir / "crlf.xyz", "# header\r\n0 0 0  \r\n1 0 0\t\r\n\r\n0 1 0 \r\n0 0 1\r\n");
  spit(dir / "extra.xyz", "0 0 0 9 9\n1 0 0 9 9\n0 1 0 9 9\n0 0 1 9 9\n");
  const auto a = read_xyz_points((dir / "lf.xyz").string());
  CHECK(read_xyz_points((dir / "crlf.xyz").string()) == a);
  std::vector<std::string> warnings;
  CHECK(read_xyz_points((dir / "extra.xyz").string(), &warnings) == a);
  CHECK(warnings.size() == 1);
}

TEST_CASE("xyz: malformed line reports its number") {
  const auto dir = scratch_dir("xyz_bad");
  spit(dir / "bad.xyz", "0 0 0\n1 0 0\n0 1 zero\n0 0 1\n");
  try {
    read_xyz((dir / "bad.xyz").string());
    FAIL("expected invalid input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidInput);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  spit(dir / "partial.xyz", "0 0 0\n1 0 0\n0 1 1e400\n0 0 1\n");
  CHECK(code_of([&] { read_xyz((dir / "partial.xyz").string()); }) == ErrorCode::InvalidInput);
}

TEST_CASE("xyz: round trip is bit exact") {
  const auto dir = scratch_dir("xyz_rt");
  const auto lc = generate_primitive(PrimitiveKind::Dumbbell, 300, 2);
  write_xyz(lc.cloud, (dir / "a.xyz").string(), {"comment"});
  const auto back = read_xyz((dir / "a.xyz").string());
  REQUIRE(back.size() == lc.cloud.size());
  for (PointId i = 0; i < back.size(); ++i) CHECK(back[i] == lc.cloud[i]);
  write_xyz(back, (dir / "b.xyz").string(), {"comment"});
  CHECK(slurp(dir / "a.xyz") == slurp(dir / "b.xyz"));
}

TEST_CASE("ply: labeled round trip and palette cycling") {
  const auto dir = scratch_dir("ply");
  const auto cloud = PointCloud::from_points(uniform_box(100, 3));
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  write_labeled_ply(cloud, labels, (dir / "a.ply").string(), {"test"});
  const auto data = read_ply((dir / "a.ply").string());
  REQUIRE(data.points.size() == 100);
  REQUIRE(data.colors.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(data.points[i] == cloud[i]);
    CHECK(palette_label(data.colors[i]) == labels[i]);
  }
  CHECK(read_segmentation_csv(sidecar_path((dir / "a.ply").string())) == labels);
  write_labeled_ply(PointCloud::from_points(data.points), labels, (dir / "b.ply").string(), {"test"});
  CHECK(slurp(dir / "a.ply") == slurp(dir / "b.ply"));

  std::vector<int> many(100);
  for (int i = 0; i < 100; ++i) many[static_cast<std::size_t>(i)] = i;
  write_labeled_ply(cloud, many, (dir / "c.ply").string());
  const auto c = read_ply((dir / "c.ply").string());
  CHECK(c.colors[3] == c.colors[3 + kPaletteSize]);
  CHECK(read_segmentation_csv(sidecar_path((dir / "c.ply").string())) == many);
}

TEST_CASE("ply: extra properties are ignored and binary is rejected") {
  const auto dir = scratch_dir("ply_extra");
  spit(dir / "x.ply",
       "ply\nformat ascii 1.0\ncomment hi\nelement vertex 4\nproperty float nx\nproperty float x\n"
       "property float y\nproperty float z\nproperty uchar quality\nelement face 0\n"
       "property list uchar int vertex_indices\nend_header\n"
       "9 0 0 0 1\n9 1 0 0 1\n9 0 1 0 1\n9 0 0 1 1\n");
  const auto d = read_ply((dir / "x.ply").string());
  REQUIRE(d.points.size() == 4);
  CHECK(d.points[1] == Vec3(1, 0, 0));
  CHECK(d.points[3] == Vec3(0, 0, 1));
  spit(dir / "b.ply", "ply\nformat binary_little_endian 1.0\nelement vertex 4\nproperty float x\nend_header\n");
  try {
    read_ply((dir / "b.ply").string());
    FAIL("expected unsupported format");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedFormat);
    CHECK(std::string(e.what()).find("binary_little_endian") != std::string::npos);
  }
}

TEST_CASE("stl: single triangle centroid") {
  const auto dir = scratch_dir("stl_one");
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  write_binary_stl(dir / "t.stl", {{a, b, c}});
  const auto cloud = sample_stl((dir / "t.stl").string(), 10000, 4);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : cloud.points()) mean += p;
  mean /= static_cast<double>(cloud.size());
  CHECK((mean - (a + b + c) / 3.0).norm() < 0.02);
}

TEST_CASE("stl: triangle counts follow the area split") {
  const auto dir = scratch_dir("stl_two");
  // Areas 1 and 3, on disjoint x ranges so each sample's triangle is known.
  write_binary_stl(dir / "t.stl", {{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)},
                                   {Vec3(10, 0, 0), Vec3(16, 0, 0), Vec3(10, 1, 0)}});
  const std::size_t n = 8000;
  const auto cloud = sample_stl((dir / "t.stl").string(), n, 9);
  std::size_t first = 0;
  for (const auto& p : cloud.points()) first += p.x() < 5.0;
  const double mean = n * 0.25, sd = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(static_cast<double>(first) - mean) <= 3.0 * sd);
}

TEST_CASE("stl: ascii parses, seeds reproduce, zero area fails") {
  const auto dir = scratch_dir("stl_ascii");
  spit(dir / "a.stl",
       "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\n"
       "endsolid t\n");
  const auto mesh = read_stl((dir / "a.stl").string());
  CHECK(mesh.faces.size() == 1);
  const auto p = sample_stl((dir / "a.stl").string(), 500, 3);
  const auto q = sample_stl((dir / "a.stl").string(), 500, 3);
  REQUIRE(p.size() == q.size());
  for (PointId i = 0; i < p.size(); ++i) CHECK(p[i] == q[i]);
  write_binary_stl(dir / "z.stl", {{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)}});
  CHECK(code_of([&] { sample_stl((dir / "z.stl").string(), 100, 1); }) == ErrorCode::InvalidInput);
}

TEST_CASE("noise model") {
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 10000, 3);
  const double h = lc.cloud.spacing();
  const auto same = add_noise(lc.cloud, {0.0, 0.0, 5});
  for (PointId i = 0; i < same.size(); ++i) CHECK(same[i] == lc.cloud[i]);

  const auto noisy = add_noise(lc.cloud, {0.0, 0.5, 5});
  double sum = 0.0, sum2 = 0.0;
  for (PointId i = 0; i < noisy.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      const double d = noisy[i][c] - lc.cloud[i][c];
      sum += d;
      sum2 += d * d;
    }
  const double m = 3.0 * static_cast<double>(noisy.size());
  const double sd = std::sqrt(sum2 / m - (sum / m) * (sum / m));
  CHECK(std::abs(sd - 0.5 * h) <= 0.03 * 0.5 * h);

  const auto shifted = add_noise(lc.cloud, {h / 2.0, 0.125, 6});
  double shift = 0.0;
  for (PointId i = 0; i < shifted.size(); ++i) shift += (shifted[i] - lc.cloud[i]).sum();
  CHECK(shift / m == doctest::Approx(h / 2.0).epsilon(0.02));

  const auto again = add_noise(lc.cloud, {0.0, 0.5, 5});
  for (PointId i = 0; i < again.size(); ++i) CHECK(again[i] == noisy[i]);
}

TEST_CASE("primitive generators") {
  const auto sphere = generate_primitive(PrimitiveKind::Sphere, 2000, 1);
  for (const auto& p : sphere.cloud.points()) CHECK(std::abs(p.norm() - 1.0) <= 1e-12);

  const std::size_t n = 3000;
  const auto cube = generate_primitive(PrimitiveKind::CubeSurface, n, 2);
  std::array<std::size_t, 6> faces{};
  for (int l : cube.labels) ++faces[static_cast<std::size_t>(l)];
  const double sd = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
  for (auto f : faces) CHECK(std::abs(static_cast<double>(f) - n / 6.0) <= 3.0 * sd);

  const auto probe = generate_primitive(PrimitiveKind::TwinCylinders, 2000, 3);
  PrimitiveOptions opt;
  opt.gap = 4.0 * probe.cloud.spacing();
  const auto twins = generate_primitive(PrimitiveKind::TwinCylinders, 2000, 3, opt);
  double closest = INFINITY;
  for (PointId i = 0; i < twins.cloud.size(); ++i)
    for (PointId j = 0; j < twins.cloud.size(); ++j)
      if (twins.labels[i] == 0 && twins.labels[j] == 1)
        closest = std::min(closest, (twins.cloud[i] - twins.cloud[j]).norm());
  CHECK(closest >= opt.gap - 1e-12);

  for (auto kind : {PrimitiveKind::FusedSpheres, PrimitiveKind::Dumbbell, PrimitiveKind::Limbed}) {
    const auto lc = generate_primitive(kind, 1000, 4);
    CHECK(lc.labels.size() == lc.cloud.size());
  }
}

TEST_CASE("sparse dump round trip") {
  const auto dir = scratch_dir("dump");
  const auto lc = generate_primitive(PrimitiveKind::Sphere, 300, 1);
  const auto op = assemble_spcl(lc.cloud, 3.0 * lc.cloud.spacing());
  write_sparse_dump(op, (dir / "a.txt").string(), {"x"});
  const auto back = read_sparse_dump((dir / "a.txt").string());
  CHECK(Eigen::MatrixXd(back.stiffness) == Eigen::MatrixXd(op.stiffness));
  CHECK(back.mass == op.mass);
  write_sparse_dump(back, (dir / "b.txt").string(), {"x"});
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
}

TEST_CASE("hks and segmentation csv round trips") {
  const auto dir = scratch_dir("csv");
  HksField hks;
  hks.t_scales = {0.1, 0.2 / 3.0, 7.0};
  hks.values = Eigen::MatrixXd::Random(5, 3).cwiseAbs();
  write_hks_csv(hks, (dir / "h.csv").string(), {"c"});
  const auto back = read_hks_csv((dir / "h.csv").string());
  CHECK(back.t_scales == hks.t_scales);
  CHECK(back.values == hks.values);
  const std::vector<int> labels{0, 2, 1, 1, 0};
  write_segmentation_csv(labels, (dir / "s.csv").string(), {}, {1, 0, 0, 0, 1});
  CHECK(read_segmentation_csv((dir / "s.csv").string()) == labels);
}

TEST_CASE("config json round trip and validation") {
  RunConfig c;
  c.eig_count = 42;
  c.radius_factor = 3.0;
  c.metric = DistanceMetric::SortedFrobenius;
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(code_of([] { config_from_json(nlohmann::json{{"no_such_key", 1}}); }) == ErrorCode::InvalidInput);
  RunConfig bad;
  bad.nu = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidInput);
}

TEST_CASE("sha256 and exit codes") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(exit_code_for(ErrorCode::InvalidInput) == 2);
  CHECK(exit_code_for(ErrorCode::SolverFailure) == 3);
  CHECK(exit_code_for(ErrorCode::UnsupportedFormat) == 4);
}
