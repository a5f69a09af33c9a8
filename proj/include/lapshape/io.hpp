#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lapshape/laplacian.hpp"
#include "lapshape/point_cloud.hpp"
#include "lapshape/segmentation.hpp"
#include "lapshape/signatures.hpp"
#include "lapshape/synthetic.hpp"

namespace lapshape {

// Comment lines embedded at the top of text outputs (without the comment
// marker, which each format adds).
using CommentLines = std::vector<std::string>;

// Whitespace-separated "x y z" per line. Blank lines and '#' comments are
// skipped, CR before LF is ignored, extra columns produce one warning.
// Malformed lines fail with their line number; fewer than 4 points fail.
PointCloud read_xyz(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::vector<Vec3> read_xyz_points(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_xyz(const std::vector<Vec3>& points, const std::string& path, const CommentLines& comments = {});
void write_xyz(const PointCloud& cloud, const std::string& path, const CommentLines& comments = {});

struct PlyData {
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> colors;  // empty when the file has no r/g/b
};

// ASCII PLY with a vertex element carrying x, y, z (other properties and
// elements are skipped). Binary variants fail with UnsupportedFormat.
PlyData read_ply(const std::string& path);

inline constexpr std::size_t kPaletteSize = 20;
std::array<int, 3> palette_color(int label);  // label < 0 maps to grey
// Inverse of palette_color: palette index, -1 for grey, -2 for unknown.
int palette_label(const std::array<int, 3>& rgb);

// ASCII PLY colored by label (palette cycles every 20 labels), plus a
// sidecar "<path>.labels.csv" with the exact labels.
void write_labeled_ply(const PointCloud& cloud, const std::vector<int>& labels, const std::string& path,
                       const CommentLines& comments = {}, const std::vector<int>& types = {});
std::string sidecar_path(const std::string& ply_path);

TriangleMesh read_stl(const std::string& path);
PointCloud sample_stl(const std::string& path, std::size_t n, std::uint64_t seed);

// CSV outputs. Numbers use 17 significant digits.
void write_hks_csv(const HksField& hks, const std::string& path, const CommentLines& comments = {});
HksField read_hks_csv(const std::string& path);
void write_segmentation_csv(const std::vector<int>& labels, const std::string& path,
                            const CommentLines& comments = {}, const std::vector<int>& types = {});
std::vector<int> read_segmentation_csv(const std::string& path);
void write_persistence_csv(const std::vector<PersistencePair>& pairs, const std::string& path,
                           const CommentLines& comments = {});

// Sparse operator dump: header, size line, sorted (row, col, value)
// triplets of the stiffness, then the mass diagonal.
void write_sparse_dump(const SpclOperator& op, const std::string& path, const CommentLines& comments = {});
SpclOperator read_sparse_dump(const std::string& path);

std::string format_double(double v);

}  // namespace lapshape
