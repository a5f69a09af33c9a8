#include "lapshape/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_map>

#include <Eigen/Geometry>

#include "lapshape/error.hpp"

namespace lapshape {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Minimum distance between generated samples, relative to sqrt(area / n).
constexpr double kMinDistanceFactor = 0.65;

// Orthonormal pair perpendicular to unit vector a.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& a) {
  const Vec3 helper = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = a.cross(helper).normalized();
  return {u, a.cross(u)};
}

// A closed solid whose boundary contributes to a union surface.
struct Solid {
  int label = 0;
  double area = 0.0;
  std::function<Vec3(Rng&)> sample;
  std::function<bool(const Vec3&)> strictly_inside;
};

Solid sphere_solid(const Vec3& c, double radius, int label) {
  Solid s;
  s.label = label;
  s.area = 4.0 * std::numbers::pi * radius * radius;
  s.sample = [c, radius](Rng& rng) {
    const double z = 2.0 * uniform(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform(rng);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(c + radius * Vec3(rho * std::cos(phi), rho * std::sin(phi), z));
  };
  s.strictly_inside = [c, radius](const Vec3& p) { return (p - c).norm() < radius * (1.0 - 1e-12); };
  return s;
}

// Capped cylinder from a to b.
Solid cylinder_solid(const Vec3& a, const Vec3& b, double radius, int label) {
  const Vec3 axis = (b - a).normalized();
  const double length = (b - a).norm();
  const auto [u, v] = perpendicular_basis(axis);
  const double lateral = 2.0 * std::numbers::pi * radius * length;
  const double cap = std::numbers::pi * radius * radius;
  Solid s;
  s.label = label;
  s.area = lateral + 2.0 * cap;
  s.sample = [=](Rng& rng) -> Vec3 {
    const double pick = uniform(rng) * (lateral + 2.0 * cap);
    if (pick < lateral) {
      const double t = uniform(rng) * length;
      const double phi = 2.0 * std::numbers::pi * uniform(rng);
      return a + t * axis + radius * (std::cos(phi) * u + std::sin(phi) * v);
    }
    const double rr = radius * std::sqrt(uniform(rng));
    const double phi = 2.0 * std::numbers::pi * uniform(rng);
    const Vec3 base = pick < lateral + cap ? a : b;
    return base + rr * (std::cos(phi) * u + std::sin(phi) * v);
  };
  s.strictly_inside = [=](const Vec3& p) {
    const double t = (p - a).dot(axis);
    if (t <= length * 1e-12 || t >= length * (1.0 - 1e-12)) return false;
    const Vec3 radial = (p - a) - t * axis;
    return radial.norm() < radius * (1.0 - 1e-12);
  };
  return s;
}

// Spatial hash used to enforce a minimum distance between accepted samples.
class DiskGrid {
 public:
  explicit DiskGrid(double min_dist) : cell_(min_dist), min_dist2_(min_dist * min_dist) {}

  bool admits(const Vec3& p) const {
    if (cell_ <= 0.0) return true;
    const auto c = cell_of(p);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (const Vec3& q : it->second)
            if ((q - p).squaredNorm() < min_dist2_) return false;
        }
    return true;
  }

  void insert(const Vec3& p) {
    if (cell_ <= 0.0) return;
    const auto c = cell_of(p);
    cells_[key(c[0], c[1], c[2])].push_back(p);
  }

 private:
  std::array<long, 3> cell_of(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
            static_cast<long>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t key(long x, long y, long z) {
    const auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1fffffULL; };
    return (u(x) << 42) | (u(y) << 21) | u(z);
  }

  double cell_;
  double min_dist2_;
  std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

// Area-weighted sample of the boundary of a union of solids: candidates are
// drawn uniformly on each solid's surface, hidden ones (strictly inside
// another solid) are rejected, and so are candidates closer than a minimum
// distance to an accepted point (dart throwing), which keeps the sampling
// well spaced.
LabeledCloud sample_union(const std::vector<Solid>& solids, std::size_t n, std::uint64_t seed,
                          bool keep_labels) {
  Rng rng(seed);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Solid& s : solids) cumulative.push_back(total += s.area);

  auto draw = [&](Rng& g) -> std::pair<Vec3, int> {
    for (;;) {
      const double pick = uniform(g) * total;
      const auto which = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      const Solid& s = solids[std::min(which, solids.size() - 1)];
      const Vec3 p = s.sample(g);
      bool hidden = false;
      for (const Solid& other : solids) {
        if (&other != &s && other.strictly_inside(p)) {
          hidden = true;
          break;
        }
      }
      if (!hidden) return {p, s.label};
    }
  };

  // Visible (union) area from the hidden fraction of a fixed probe sample.
  double visible_area = total;
  if (solids.size() > 1) {
    Rng probe(seed ^ 0x9e3779b97f4a7c15ULL);
    std::size_t tried = 0, kept = 0;
    while (kept < 20000) {
      const double pick = uniform(probe) * total;
      const auto which = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      const Solid& s = solids[std::min(which, solids.size() - 1)];
      const Vec3 p = s.sample(probe);
      ++tried;
      bool hidden = false;
      for (const Solid& other : solids)
        if (&other != &s && other.strictly_inside(p)) hidden = true;
      if (!hidden) ++kept;
    }
    visible_area = total * static_cast<double>(kept) / static_cast<double>(tried);
  }

  DiskGrid grid(kMinDistanceFactor * std::sqrt(visible_area / static_cast<double>(n)));
  std::vector<Vec3> pts;
  std::vector<int> labels;
  pts.reserve(n);
  std::size_t misses = 0;
  while (pts.size() < n) {
    const auto [p, label] = draw(rng);
    if (!grid.admits(p)) {
      if (++misses > 1000 * n) throw Error(ErrorCode::InvalidInput, "surface sampling saturated");
      continue;
    }
    grid.insert(p);
    pts.push_back(p);
    labels.push_back(label);
  }
  LabeledCloud out;
  std::size_t dropped = 0;
  out.cloud = PointCloud::from_points(std::move(pts), &dropped);
  if (dropped != 0) throw Error(ErrorCode::InvalidInput, "generator produced coincident points");
  if (keep_labels) out.labels = std::move(labels);
  return out;
}

}  // namespace

PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec, double h) {
  if (spec.sigma_p < 0.0) throw Error(ErrorCode::InvalidInput, "noise sigma_p must be >= 0");
  if (h <= 0.0) h = cloud.spacing();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = spec.sigma_p * h;
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) {
    Vec3 q = p;
    for (int a = 0; a < 3; ++a) q[a] += spec.mu + sigma * normal(rng);
    out.push_back(q);
  }
  return PointCloud::from_points(std::move(out));
}

PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::InvalidInput, "sample count must be at least 4");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    for (int v : f) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size())
        throw Error(ErrorCode::InvalidInput, "face references a missing vertex");
    }
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(f[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(f[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(f[2])];
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidInput, "mesh has zero surface area");

  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(f[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(f[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(f[2])];
    pts.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
  }
  return PointCloud::from_points(std::move(pts));
}

std::optional<PrimitiveKind> parse_primitive_kind(const std::string& name) {
  for (PrimitiveKind k : {PrimitiveKind::Sphere, PrimitiveKind::CubeSurface, PrimitiveKind::Cylinder,
                          PrimitiveKind::FusedSpheres, PrimitiveKind::Dumbbell,
                          PrimitiveKind::TwinCylinders, PrimitiveKind::Limbed}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

const char* to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::CubeSurface: return "cube-surface";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::FusedSpheres: return "fused-spheres";
    case PrimitiveKind::Dumbbell: return "dumbbell";
    case PrimitiveKind::TwinCylinders: return "twin-cylinders";
    case PrimitiveKind::Limbed: return "limbed";
  }
  return "unknown";
}

LabeledCloud generate_primitive(PrimitiveKind kind, std::size_t n, std::uint64_t seed,
                                const PrimitiveOptions& options) {
  if (n < 100) throw Error(ErrorCode::InvalidInput, "primitives need at least 100 points");
  switch (kind) {
    case PrimitiveKind::Sphere: {
      LabeledCloud out = sample_union({sphere_solid(Vec3::Zero(), 1.0, 0)}, n, seed, false);
      // Project back to the exact radius.
      out.cloud = out.cloud.transformed([](const Vec3& p) -> Vec3 { return p.normalized(); });
      return out;
    }
    case PrimitiveKind::CubeSurface: {
      std::vector<Solid> faces;
      for (int face = 0; face < 6; ++face) {
        Solid s;
        s.label = face;
        s.area = 4.0;
        s.sample = [face](Rng& rng) {
          const int axis = face / 2;
          Vec3 p;
          p[axis] = face % 2 == 0 ? -1.0 : 1.0;
          p[(axis + 1) % 3] = 2.0 * uniform(rng) - 1.0;
          p[(axis + 2) % 3] = 2.0 * uniform(rng) - 1.0;
          return p;
        };
        s.strictly_inside = [](const Vec3&) { return false; };
        faces.push_back(std::move(s));
      }
      return sample_union(faces, n, seed, true);
    }
    case PrimitiveKind::Cylinder:
      return sample_union({cylinder_solid(Vec3(0, 0, -1), Vec3(0, 0, 1), 1.0, 0)}, n, seed, false);
    case PrimitiveKind::FusedSpheres: {
      std::vector<Solid> solids;
      const Vec3 dirs[4] = {Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitX(), -Vec3::UnitY()};
      for (int i = 0; i < 4; ++i) solids.push_back(sphere_solid(1.3 * dirs[i], 1.0, i));
      for (int i = 0; i < 4; ++i) solids.push_back(sphere_solid(2.5 * dirs[i], 0.5, 4 + i));
      return sample_union(solids, n, seed, true);
    }
    case PrimitiveKind::Dumbbell:
      return sample_union({sphere_solid(Vec3(-1.75, 0, 0), 1.0, 0),
                           sphere_solid(Vec3(1.75, 0, 0), 1.0, 1),
                           cylinder_solid(Vec3(-1.75, 0, 0), Vec3(1.75, 0, 0), 0.3, 2)},
                          n, seed, true);
    case PrimitiveKind::TwinCylinders: {
      if (!(options.gap > 0.0)) throw Error(ErrorCode::InvalidInput, "twin-cylinder gap must be positive");
      const double offset = 1.0 + 0.5 * options.gap;
      return sample_union({cylinder_solid(Vec3(-offset, 0, -2), Vec3(-offset, 0, 2), 1.0, 0),
                           cylinder_solid(Vec3(offset, 0, -2), Vec3(offset, 0, 2), 1.0, 1)},
                          n, seed, true);
    }
    case PrimitiveKind::Limbed: {
      std::vector<Solid> solids{sphere_solid(Vec3::Zero(), 1.0, 0)};
      const Vec3 dirs[4] = {Vec3(1, 0, -0.3).normalized(), Vec3(-1, 0, -0.3).normalized(),
                            Vec3(0, 1, 0.4).normalized(), Vec3(0, -1, 0.4).normalized()};
      const double lengths[4] = {2.2, 2.2, 2.6, 1.9};
      for (int i = 0; i < 4; ++i)
        solids.push_back(cylinder_solid(Vec3::Zero(), lengths[i] * dirs[i], 0.3, i + 1));
      return sample_union(solids, n, seed, true);
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown primitive kind");
}

Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  return q.toRotationMatrix();
}

PointCloud rigid_transform(const PointCloud& cloud, const Eigen::Matrix3d& R, const Vec3& t) {
  return cloud.transformed([&](const Vec3& p) -> Vec3 { return R * p + t; });
}

PointCloud permute(const PointCloud& cloud, const std::vector<std::size_t>& perm) {
  if (perm.size() != cloud.size()) throw Error(ErrorCode::InvalidInput, "permutation size mismatch");
  std::vector<Vec3> out;
  out.reserve(perm.size());
  for (std::size_t i : perm) out.push_back(cloud[i]);
  return PointCloud::from_points(std::move(out));
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace lapshape
