#include "lapshape/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <tuple>

#include "lapshape/error.hpp"

namespace lapshape {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string where(const std::string& path, std::size_t lineno) { return path + ":" + std::to_string(lineno); }

double parse_double(std::string_view tok, const std::string& path, std::size_t lineno, bool allow_inf = false) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || std::isnan(v) || (!allow_inf && std::isinf(v)))
    throw Error(ErrorCode::InvalidInput, where(path, lineno) + ": not a finite number: '" + std::string(tok) + "'");
  return v;
}

long long parse_int(std::string_view tok, const std::string& path, std::size_t lineno) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorCode::InvalidInput, where(path, lineno) + ": not an integer: '" + std::string(tok) + "'");
  return v;
}

void write_comments(std::ostream& out, const CommentLines& comments, const char* marker) {
  for (const auto& c : comments) out << marker << c << '\n';
}

PointCloud cloud_from(std::vector<Vec3> pts, const std::string& path, std::vector<std::string>* warnings) {
  if (pts.size() < 4)
    throw Error(ErrorCode::InvalidInput, path + ": need at least 4 points, found " + std::to_string(pts.size()));
  std::size_t dropped = 0;
  PointCloud cloud = PointCloud::from_points(std::move(pts), &dropped);
  if (dropped > 0 && warnings)
    warnings->push_back(path + ": dropped " + std::to_string(dropped) + " coincident points");
  if (cloud.size() < 4)
    throw Error(ErrorCode::InvalidInput, path + ": fewer than 4 distinct points");
  return cloud;
}

// Twenty well-separated colors; labels cycle through them.
constexpr std::array<std::array<int, 3>, kPaletteSize> kPalette{{
    {31, 119, 180}, {255, 127, 14}, {44, 160, 44},   {214, 39, 40},   {148, 103, 189},
    {140, 86, 75},  {227, 119, 194}, {188, 189, 34}, {23, 190, 207},  {174, 199, 232},
    {255, 187, 120}, {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {196, 156, 148},
    {247, 182, 210}, {219, 219, 141}, {158, 218, 229}, {57, 59, 121},   {99, 121, 57},
}};
constexpr std::array<int, 3> kGrey{128, 128, 128};

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Vec3> read_xyz_points(const std::string& path, std::vector<std::string>* warnings) {
  const auto lines = read_lines(path);
  std::vector<Vec3> pts;
  std::size_t extra_lines = 0, first_extra = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = tokens(line);
    if (tok.size() < 3)
      throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": expected 3 coordinates, found " +
                                               std::to_string(tok.size()));
    if (tok.size() > 3 && extra_lines++ == 0) first_extra = i + 1;
    pts.emplace_back(parse_double(tok[0], path, i + 1), parse_double(tok[1], path, i + 1),
                     parse_double(tok[2], path, i + 1));
  }
  if (extra_lines > 0 && warnings)
    warnings->push_back(path + ": ignored extra columns on " + std::to_string(extra_lines) +
                        " lines (first at line " + std::to_string(first_extra) + ")");
  return pts;
}

PointCloud read_xyz(const std::string& path, std::vector<std::string>* warnings) {
  return cloud_from(read_xyz_points(path, warnings), path, warnings);
}

void write_xyz(const std::vector<Vec3>& points, const std::string& path, const CommentLines& comments) {
  auto out = open_out(path);
  write_comments(out, comments, "# ");
  for (const Vec3& p : points)
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
  finish(out, path);
}

void write_xyz(const PointCloud& cloud, const std::string& path, const CommentLines& comments) {
  write_xyz(std::vector<Vec3>(cloud.points().begin(), cloud.points().end()), path, comments);
}

PlyData read_ply(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "ply") throw Error(ErrorCode::UnsupportedFormat, path + ": not a PLY file");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    std::vector<bool> is_list;
  };
  std::vector<Element> elements;
  std::size_t i = 1;
  bool ascii = false;
  for (; i < lines.size(); ++i) {
    const auto tok = tokens(lines[i]);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") {
      ++i;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() < 2) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": bad format line");
      if (tok[1] != "ascii")
        throw Error(ErrorCode::UnsupportedFormat, path + ": PLY variant '" + std::string(tok[1]) +
                                                      "' is not supported (ascii only)");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": bad element line");
      Element e;
      e.name = std::string(tok[1]);
      e.count = static_cast<std::size_t>(parse_int(tok[2], path, i + 1));
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty() || tok.size() < 3)
        throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": property outside an element");
      const bool list = tok[1] == "list";
      if (list && tok.size() != 5) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": bad list property");
      elements.back().props.emplace_back(tok.back());
      elements.back().is_list.push_back(list);
    } else {
      throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": unexpected header line");
    }
  }
  if (!ascii) throw Error(ErrorCode::InvalidInput, path + ": missing format line");

  PlyData out;
  bool have_vertex = false;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    for (std::size_t p = 0; p < e.props.size(); ++p) {
      const std::string& n = e.props[p];
      const int idx = static_cast<int>(p);
      if (n == "x") ix = idx;
      else if (n == "y") iy = idx;
      else if (n == "z") iz = idx;
      else if (n == "red" || n == "r") ir = idx;
      else if (n == "green" || n == "g") ig = idx;
      else if (n == "blue" || n == "b") ib = idx;
    }
    if (is_vertex) {
      if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::InvalidInput, path + ": vertex element lacks x/y/z");
      have_vertex = true;
    }
    const bool colors = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;
    for (std::size_t row = 0; row < e.count; ++row, ++i) {
      while (i < lines.size() && trim(lines[i]).empty()) ++i;
      if (i >= lines.size()) throw Error(ErrorCode::InvalidInput, path + ": file ends inside element " + e.name);
      if (!is_vertex) continue;
      const auto tok = tokens(lines[i]);
      // Expand list properties so scalar columns line up.
      std::vector<std::string_view> values;
      std::size_t t = 0;
      for (std::size_t p = 0; p < e.props.size(); ++p) {
        if (t >= tok.size()) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": too few values");
        if (e.is_list[p]) {
          const auto len = parse_int(tok[t], path, i + 1);
          values.push_back(tok[t]);
          t += 1 + static_cast<std::size_t>(len);
        } else {
          values.push_back(tok[t++]);
        }
      }
      if (t != tok.size()) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": wrong number of values");
      out.points.emplace_back(parse_double(values[static_cast<std::size_t>(ix)], path, i + 1),
                              parse_double(values[static_cast<std::size_t>(iy)], path, i + 1),
                              parse_double(values[static_cast<std::size_t>(iz)], path, i + 1));
      if (colors)
        out.colors.push_back({static_cast<int>(parse_int(values[static_cast<std::size_t>(ir)], path, i + 1)),
                              static_cast<int>(parse_int(values[static_cast<std::size_t>(ig)], path, i + 1)),
                              static_cast<int>(parse_int(values[static_cast<std::size_t>(ib)], path, i + 1))});
    }
  }
  if (!have_vertex) throw Error(ErrorCode::InvalidInput, path + ": no vertex element");
  if (out.points.size() < 4)
    throw Error(ErrorCode::InvalidInput, path + ": need at least 4 points, found " + std::to_string(out.points.size()));
  return out;
}

std::array<int, 3> palette_color(int label) {
  if (label < 0) return kGrey;
  return kPalette[static_cast<std::size_t>(label) % kPaletteSize];
}

int palette_label(const std::array<int, 3>& rgb) {
  if (rgb == kGrey) return -1;
  for (std::size_t i = 0; i < kPaletteSize; ++i)
    if (kPalette[i] == rgb) return static_cast<int>(i);
  return -2;
}

std::string sidecar_path(const std::string& ply_path) { return ply_path + ".labels.csv"; }

void write_labeled_ply(const PointCloud& cloud, const std::vector<int>& labels, const std::string& path,
                       const CommentLines& comments, const std::vector<int>& types) {
  if (labels.size() != cloud.size()) throw Error(ErrorCode::InvalidInput, "label count does not match the cloud");
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  write_comments(out, comments, "comment ");
  out << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    const auto c = palette_color(labels[i]);
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << ' ' << c[0]
        << ' ' << c[1] << ' ' << c[2] << '\n';
  }
  finish(out, path);
  write_segmentation_csv(labels, sidecar_path(path), comments, types);
}

TriangleMesh read_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  TriangleMesh mesh;
  if (bytes.size() >= 84) {
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    if (bytes.size() == 84 + 50ull * count) {
      for (std::uint32_t f = 0; f < count; ++f) {
        const char* rec = bytes.data() + 84 + 50ull * f;
        std::array<int, 3> face{};
        for (int v = 0; v < 3; ++v) {
          float xyz[3];
          std::memcpy(xyz, rec + 12 + 12 * v, 12);
          face[static_cast<std::size_t>(v)] = static_cast<int>(mesh.vertices.size());
          mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
        }
        mesh.faces.push_back(face);
      }
      return mesh;
    }
  }
  if (bytes.rfind("solid", 0) != 0)
    throw Error(ErrorCode::UnsupportedFormat, path + ": neither binary STL (size mismatch) nor ascii STL");

  std::size_t lineno = 0;
  std::istringstream text(bytes);
  std::string line;
  std::vector<Vec3> pending;
  while (std::getline(text, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0] != "vertex") continue;
    if (tok.size() != 4) throw Error(ErrorCode::InvalidInput, where(path, lineno) + ": bad vertex line");
    pending.emplace_back(parse_double(tok[1], path, lineno), parse_double(tok[2], path, lineno),
                         parse_double(tok[3], path, lineno));
    if (pending.size() == 3) {
      const int base = static_cast<int>(mesh.vertices.size());
      mesh.vertices.insert(mesh.vertices.end(), pending.begin(), pending.end());
      mesh.faces.push_back({base, base + 1, base + 2});
      pending.clear();
    }
  }
  if (!pending.empty()) throw Error(ErrorCode::InvalidInput, path + ": facet with fewer than 3 vertices");
  if (mesh.faces.empty()) throw Error(ErrorCode::InvalidInput, path + ": no facets");
  return mesh;
}

PointCloud sample_stl(const std::string& path, std::size_t n, std::uint64_t seed) {
  return sample_mesh(read_stl(path), n, seed);
}

void write_hks_csv(const HksField& hks, const std::string& path, const CommentLines& comments) {
  auto out = open_out(path);
  write_comments(out, comments, "# ");
  for (std::size_t s = 0; s < hks.scales(); ++s) out << (s ? "," : "") << format_double(hks.t_scales[s]);
  out << '\n';
  for (Eigen::Index p = 0; p < hks.values.rows(); ++p) {
    for (Eigen::Index s = 0; s < hks.values.cols(); ++s) out << (s ? "," : "") << format_double(hks.values(p, s));
    out << '\n';
  }
  finish(out, path);
}

HksField read_hks_csv(const std::string& path) {
  const auto lines = read_lines(path);
  HksField hks;
  std::vector<std::vector<double>> rows;
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> values;
    for (auto f : split(line, ',')) values.push_back(parse_double(trim(f), path, i + 1));
    if (!header) {
      hks.t_scales = std::move(values);
      header = true;
      continue;
    }
    if (values.size() != hks.t_scales.size())
      throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": expected " +
                                               std::to_string(hks.t_scales.size()) + " columns");
    rows.push_back(std::move(values));
  }
  if (!header || rows.empty()) throw Error(ErrorCode::InvalidInput, path + ": empty HKS table");
  hks.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(hks.t_scales.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      hks.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return hks;
}

void write_segmentation_csv(const std::vector<int>& labels, const std::string& path, const CommentLines& comments,
                            const std::vector<int>& types) {
  auto out = open_out(path);
  write_comments(out, comments, "# ");
  const bool typed = !types.empty();
  out << (typed ? "point_id,segment_id,type_id\n" : "point_id,segment_id\n");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << labels[i];
    if (typed) out << ',' << (labels[i] < 0 ? -1 : types[static_cast<std::size_t>(labels[i])]);
    out << '\n';
  }
  finish(out, path);
}

std::vector<int> read_segmentation_csv(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<int> labels;
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line.rfind("point_id,segment_id", 0) != 0)
        throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": expected a point_id,segment_id header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() < 2) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": expected point_id,segment_id");
    const auto id = parse_int(trim(f[0]), path, i + 1);
    if (id != static_cast<long long>(labels.size()))
      throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": point ids must be consecutive from 0");
    labels.push_back(static_cast<int>(parse_int(trim(f[1]), path, i + 1)));
  }
  if (labels.empty()) throw Error(ErrorCode::InvalidInput, path + ": no rows");
  return labels;
}

void write_persistence_csv(const std::vector<PersistencePair>& pairs, const std::string& path,
                           const CommentLines& comments) {
  auto out = open_out(path);
  write_comments(out, comments, "# ");
  out << "birth,death,lifespan\n";
  for (const auto& p : pairs)
    out << format_double(p.birth) << ',' << format_double(p.death) << ',' << format_double(p.lifespan) << '\n';
  finish(out, path);
}

void write_sparse_dump(const SpclOperator& op, const std::string& path, const CommentLines& comments) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> triplets;
  for (Eigen::Index c = 0; c < op.stiffness.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(op.stiffness, c); it; ++it) triplets.emplace_back(it.row(), it.col(), it.value());
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  auto out = open_out(path);
  out << "lapshape-sparse v1\n";
  write_comments(out, comments, "# ");
  out << "size " << op.size() << ' ' << triplets.size() << ' ' << format_double(op.radius) << ' '
      << format_double(op.bandwidth) << '\n';
  for (const auto& [r, c, v] : triplets) out << r << ' ' << c << ' ' << format_double(v) << '\n';
  for (Eigen::Index i = 0; i < op.mass.size(); ++i) out << format_double(op.mass[i]) << '\n';
  finish(out, path);
}

SpclOperator read_sparse_dump(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "lapshape-sparse v1")
    throw Error(ErrorCode::UnsupportedFormat, path + ": missing 'lapshape-sparse v1' header");
  std::size_t i = 1;
  while (i < lines.size() && (lines[i].empty() || lines[i][0] == '#')) ++i;
  if (i >= lines.size()) throw Error(ErrorCode::InvalidInput, path + ": missing size line");
  const auto head = tokens(lines[i]);
  if (head.size() != 5 || head[0] != "size") throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": bad size line");
  const auto n = parse_int(head[1], path, i + 1);
  const auto nnz = parse_int(head[2], path, i + 1);
  if (n < 1 || nnz < 0) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": bad sizes");
  SpclOperator op;
  op.radius = parse_double(head[3], path, i + 1);
  op.bandwidth = parse_double(head[4], path, i + 1);
  ++i;
  if (lines.size() < i + static_cast<std::size_t>(nnz + n))
    throw Error(ErrorCode::InvalidInput, path + ": truncated dump");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k, ++i) {
    const auto tok = tokens(lines[i]);
    if (tok.size() != 3) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": expected 'row col value'");
    const auto r = parse_int(tok[0], path, i + 1);
    const auto c = parse_int(tok[1], path, i + 1);
    if (r < 0 || r >= n || c < 0 || c >= n) throw Error(ErrorCode::InvalidInput, where(path, i + 1) + ": index out of range");
    trip.emplace_back(static_cast<int>(r), static_cast<int>(c), parse_double(tok[2], path, i + 1));
  }
  op.stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.mass.resize(static_cast<Eigen::Index>(n));
  for (long long k = 0; k < n; ++k, ++i) op.mass[static_cast<Eigen::Index>(k)] = parse_double(trim(lines[i]), path, i + 1);
  return op;
}

}  // namespace lapshape
