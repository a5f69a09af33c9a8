#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lapshape/point_cloud.hpp"

namespace lapshape {

// Gaussian displacement of every coordinate: N(mu, (sigma_p * h)^2).
struct NoiseSpec {
  double mu = 0.0;
  double sigma_p = 0.0;
  std::uint64_t seed = 0;
};

// h is the spacing of the clean cloud; pass 0 to use cloud.spacing().
PointCloud add_noise(const PointCloud& cloud, const NoiseSpec& spec, double h = 0.0);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

// Area-weighted Monte Carlo sample, uniform within each triangle via the
// square-root barycentric warp.
PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

enum class PrimitiveKind { Sphere, CubeSurface, Cylinder, FusedSpheres, Dumbbell, TwinCylinders, Limbed };

std::optional<PrimitiveKind> parse_primitive_kind(const std::string& name);
const char* to_string(PrimitiveKind kind);

struct PrimitiveOptions {
  // Surface-to-surface distance between the two twin cylinders.
  double gap = 0.5;
};

// Well-spaced uniform area-weighted surface samples (dart throwing with a
// minimum distance of 0.65 * sqrt(area / n)). `labels` carries the generating
// component (face for the cube, sphere for fused spheres, bulb/neck for the
// dumbbell, cylinder for the twins, body/limb for the limbed blob); empty
// for single-component shapes.
struct LabeledCloud {
  PointCloud cloud;
  std::vector<int> labels;
};

// Geometry of the shapes (all model units):
//  sphere         unit sphere at the origin
//  cube-surface   [-1, 1]^3 boundary, labels 0..5 = -x,+x,-y,+y,-z,+z
//  cylinder       radius 1, z in [-1, 1], with caps
//  fused-spheres  4 unit spheres around the origin plus 4 spheres of radius
//                 0.5 fused outward; labels 0..3 large, 4..7 small
//  dumbbell       unit spheres at x = +-1.75 joined by a radius-0.3 neck;
//                 labels 0 = left bulb, 1 = right bulb, 2 = neck
//  twin-cylinders two capped cylinders (radius 1, length 4) with parallel
//                 axes, surfaces `gap` apart; labels 0, 1
//  limbed         sphere of radius 1 with four capped limbs of radius 0.3;
//                 labels 0 = body, 1..4 = limbs
LabeledCloud generate_primitive(PrimitiveKind kind, std::size_t n, std::uint64_t seed,
                                const PrimitiveOptions& options = {});

Eigen::Matrix3d random_rotation(std::uint64_t seed);

// p -> R p + t for every point.
PointCloud rigid_transform(const PointCloud& cloud, const Eigen::Matrix3d& R, const Vec3& t);

// out[i] = cloud[perm[i]].
PointCloud permute(const PointCloud& cloud, const std::vector<std::size_t>& perm);

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lapshape
