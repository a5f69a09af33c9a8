#pragma once

// Shared fixtures and brute-force oracles for the unit tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lapshape/point_cloud.hpp"

namespace testing {

using lapshape::PointCloud;
using lapshape::Vec3;

inline std::vector<Vec3> grid_points(int nx, int ny, double step = 1.0) {
  std::vector<Vec3> pts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.emplace_back(i * step, j * step, 0.0);
  return pts;
}

inline std::vector<Vec3> uniform_box(std::size_t n, std::uint64_t seed, Vec3 extent = Vec3(1, 1, 1)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng) * extent.x(), u(rng) * extent.y(), u(rng) * extent.z());
  return pts;
}

inline double brute_nn_mean(const std::vector<Vec3>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) best = std::min(best, (pts[i] - pts[j]).norm());
    total += best;
  }
  return total / static_cast<double>(pts.size());
}

inline double angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return std::acos(c) * 180.0 / M_PI;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lapshape_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace testing
