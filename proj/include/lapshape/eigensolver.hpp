#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "lapshape/laplacian.hpp"

namespace lapshape {

// Smallest eigenpairs of W phi = lambda B phi. Eigenvalues ascend;
// eigenvector columns are B-orthonormal.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // n x k
  double min_unclamped = 0.0;    // smallest eigenvalue before clamping to 0
  std::size_t krylov_dimension = 0;

  std::size_t count() const { return static_cast<std::size_t>(eigenvalues.size()); }
  std::size_t points() const { return static_cast<std::size_t>(eigenvectors.rows()); }
};

struct EigenOptions {
  std::uint64_t seed = 0x5eedULL;
  // Converged when every wanted Ritz residual of the inverted operator is
  // below tolerance * |ritz value|.
  double tolerance = 1e-10;
  std::size_t block_size = 4;
  // Cap on the Krylov dimension as a multiple of k (plus a constant).
  std::size_t max_dimension_factor = 50;
  // Shift as a fraction of the mean diagonal of B^-1/2 W B^-1/2.
  double shift_fraction = 1e-3;
};

// Shift-inverted block Krylov iteration with full reorthogonalization on
// B^-1/2 W B^-1/2. Throws InvalidInput for k outside [1, n-1] and
// SolverFailure (residuals in Error::values) when the cap is reached.
EigenSystem solve_eigs(const SpclOperator& op, std::size_t k, const EigenOptions& options = {});

}  // namespace lapshape
