#pragma once

#include <vector>

#include <Eigen/Core>

namespace lapshape {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
// potentials, O(n^3)).
Assignment hungarian(const Eigen::MatrixXd& cost);

}  // namespace lapshape
