#include <algorithm>
#include <cmath>
#include <numeric>

#include "lapshape/error.hpp"
#include "lapshape/segmentation.hpp"
#include "lapshape/signatures.hpp"

namespace lapshape {

void heat_walk_step(const Eigen::MatrixXd& K, const std::vector<PointId>& exemplar_of,
                    const std::vector<double>& potential, std::vector<PointId>& next_exemplar,
                    std::vector<double>& next_potential) {
  const std::size_t n = potential.size();
  std::vector<bool> is_exemplar(n, false);
  for (PointId e : exemplar_of) is_exemplar[e] = true;
  next_exemplar.assign(n, 0);
  next_potential.assign(n, 0.0);
  for (PointId x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double best = -std::numeric_limits<double>::infinity();
    double best_exemplar = -std::numeric_limits<double>::infinity();
    PointId arg = 0;
    for (PointId y = 0; y < n; ++y) {
      const double v = std::min(K(xi, static_cast<Eigen::Index>(y)), potential[y]);
      if (v > best) {
        best = v;
        arg = y;
      }
      if (is_exemplar[y] && v > best_exemplar) best_exemplar = v;
    }
    next_exemplar[x] = arg;
    next_potential[x] = best_exemplar;
  }
}

HeatWalkResult heat_walk(const HeatKernelMatrix& kernel, std::size_t max_iterations) {
  const Eigen::MatrixXd& K = kernel.entries;
  const std::size_t n = static_cast<std::size_t>(K.rows());
  if (n == 0 || K.cols() != K.rows()) throw Error(ErrorCode::InvalidInput, "heat kernel must be square and nonempty");

  HeatWalkResult out;
  // Every point starts as its own exemplar with potential k_t(x, x).
  std::vector<PointId> e(n);
  std::iota(e.begin(), e.end(), PointId{0});
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));

  std::vector<PointId> e_next;
  std::vector<double> s_next;
  while (out.iterations < max_iterations) {
    heat_walk_step(K, e, s, e_next, s_next);
    ++out.iterations;
    const bool same = e_next == e && s_next == s;
    e.swap(e_next);
    s.swap(s_next);
    if (same) {
      out.converged = true;
      break;
    }
  }
  out.exemplar_of = e;
  out.potential = s;

  // Regions are the connected pieces of the functional graph x -> e(x). Each
  // piece ends in a cycle (usually a self-loop); its exemplar is the cycle
  // point with the highest potential, lowest index on ties.
  std::vector<int> region(n, -2);
  std::vector<int> visit(n, -1);
  std::vector<PointId> path;
  for (PointId start = 0; start < n; ++start) {
    if (region[start] != -2) continue;
    path.clear();
    PointId p = start;
    while (region[p] == -2 && visit[p] != static_cast<int>(start)) {
      visit[p] = static_cast<int>(start);
      path.push_back(p);
      p = e[p];
    }
    int id;
    if (region[p] != -2) {
      id = region[p];
    } else {
      // p closes a new cycle.
      PointId best = p;
      for (PointId q = e[p]; q != p; q = e[q])
        if (s[q] > s[best] || (s[q] == s[best] && q < best)) best = q;
      id = static_cast<int>(out.exemplars.size());
      out.exemplars.push_back(best);
    }
    for (PointId q : path) region[q] = id;
  }

  // Order regions by exemplar index so labels do not depend on the scan.
  std::vector<std::size_t> order(out.exemplars.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.exemplars[a] < out.exemplars[b]; });
  std::vector<int> relabel(order.size());
  std::vector<PointId> sorted_exemplars(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    relabel[order[i]] = static_cast<int>(i);
    sorted_exemplars[i] = out.exemplars[order[i]];
  }
  out.exemplars = std::move(sorted_exemplars);
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.assignment[i] = relabel[static_cast<std::size_t>(region[i])];

  // Dissipator split by comparing each point's heat distribution with the
  // uniform one and with its region's mean distribution.
  Eigen::MatrixXd P = K;
  if ((P.array() < 0.0).any()) {
    out.clamped_negative = true;
    P = P.cwiseMax(0.0);
  }
  const Eigen::VectorXd row_sum = P.rowwise().sum();
  const std::size_t regions = out.exemplars.size();
  Eigen::MatrixXd region_mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(regions), P.cols());
  Eigen::VectorXd region_total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(regions));
  for (std::size_t x = 0; x < n; ++x) {
    const auto r = static_cast<Eigen::Index>(out.assignment[x]);
    region_mass.row(r) += P.row(static_cast<Eigen::Index>(x));
    region_total[r] += row_sum[static_cast<Eigen::Index>(x)];
  }
  const double log_n = std::log(static_cast<double>(n));
  std::vector<int> final_assignment = out.assignment;
  std::vector<bool> is_exemplar(n, false);
  for (PointId e : out.exemplars) is_exemplar[e] = true;
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    const auto r = static_cast<Eigen::Index>(out.assignment[x]);
    // Exemplars always stay in their own region.
    if (is_exemplar[x] || !(row_sum[xi] > 0.0)) continue;
    double kl_uniform = 0.0, kl_region = 0.0;
    for (Eigen::Index y = 0; y < P.cols(); ++y) {
      const double px = P(xi, y) / row_sum[xi];
      if (px <= 0.0) continue;
      const double pi = region_mass(r, y) / region_total[r];
      const double log_px = std::log(px);
      kl_uniform += px * (log_px + log_n);
      kl_region += px * (log_px - std::log(pi));
    }
    if (kl_uniform < kl_region) final_assignment[x] = kDissipator;
  }
  out.assignment = std::move(final_assignment);
  return out;
}

std::vector<double> heat_walk_type_criteria(const HeatWalkResult& walk, const Eigen::VectorXd& hks) {
  std::vector<double> out;
  for (PointId e : walk.exemplars) out.push_back(hks[static_cast<Eigen::Index>(e)]);
  double sum = 0.0;
  std::size_t kept = 0, dissipators = 0;
  for (std::size_t x = 0; x < walk.assignment.size(); ++x) {
    if (walk.assignment[x] == kDissipator) {
      ++dissipators;
    } else {
      sum += hks[static_cast<Eigen::Index>(x)];
      ++kept;
    }
  }
  if (dissipators > 0 && kept > 0) out.push_back(sum / static_cast<double>(kept));
  return out;
}

}  // namespace lapshape
