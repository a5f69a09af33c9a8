#include "lapshape/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "lapshape/error.hpp"

namespace lapshape {

namespace {

// Portable uniform draw in [-1, 1) from raw 64-bit output.
class StartVectors {
 public:
  explicit StartVectors(std::uint64_t seed) : state_(seed) {}

  double next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }

  Eigen::VectorXd vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = next();
    return v;
  }

 private:
  std::uint64_t state_;
};

// Orthogonalizes x against the first m columns of Q (two classical passes)
// and returns the accumulated coefficients.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& Q, Eigen::Index m, Eigen::VectorXd& x) {
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(m);
  if (m == 0) return coeff;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = Q.leftCols(m).transpose() * x;
    x.noalias() -= Q.leftCols(m) * c;
    coeff += c;
  }
  return coeff;
}

}  // namespace

EigenSystem solve_eigs(const SpclOperator& op, std::size_t k, const EigenOptions& options) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (k < 1 || static_cast<Eigen::Index>(k) > n - 1) {
    throw Error(ErrorCode::InvalidInput, "eigenpair count " + std::to_string(k) +
                                             " outside [1, " + std::to_string(n - 1) + "]");
  }
  if ((op.mass.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidInput, "mass matrix must be positive");
  }

  const Eigen::VectorXd dinv = op.mass.cwiseSqrt().cwiseInverse();
  SparseMatrix A = dinv.asDiagonal() * op.stiffness * dinv.asDiagonal();
  double mean_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean_diag += A.coeff(i, i);
  mean_diag /= static_cast<double>(n);
  const double shift = options.shift_fraction * std::max(mean_diag, 1e-300);

  SparseMatrix shifted = A;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw Error(ErrorCode::SolverFailure, "factorization of the shifted operator failed");
  }

  const auto kk = static_cast<Eigen::Index>(k);
  const auto block = static_cast<Eigen::Index>(std::max<std::size_t>(1, options.block_size));
  const Eigen::Index cap =
      std::min<Eigen::Index>(n, static_cast<Eigen::Index>(options.max_dimension_factor * k + 50));

  StartVectors rng(options.seed);
  Eigen::MatrixXd Q(n, std::min<Eigen::Index>(n, 2 * kk + 4 * block + 16));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(Q.cols(), Q.cols());
  Eigen::Index m = 0;  // basis columns filled

  auto ensure_capacity = [&](Eigen::Index need) {
    if (need <= Q.cols()) return;
    const Eigen::Index grown = std::min<Eigen::Index>(n, std::max(need, Q.cols() + Q.cols() / 2));
    Q.conservativeResize(Eigen::NoChange, grown);
    const Eigen::Index old = H.cols();
    H.conservativeResize(grown, grown);
    H.rightCols(grown - old).setZero();
    H.bottomRows(grown - old).setZero();
  };

  // Appends a fresh random direction orthogonal to the basis; false when the
  // basis already spans the space.
  auto append_random = [&]() {
    for (int attempt = 0; attempt < 4 && m < n; ++attempt) {
      Eigen::VectorXd v = rng.vector(n);
      const double before = v.norm();
      orthogonalize(Q, m, v);
      const double after = v.norm();
      if (after > 1e-8 * before) {
        ensure_capacity(m + 1);
        Q.col(m) = v / after;
        ++m;
        return true;
      }
    }
    return false;
  };

  for (Eigen::Index b = 0; b < block && m < n; ++b) append_random();

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  Eigen::VectorXd residual;
  Eigen::Index expanded = 0;
  const Eigen::Index check_every = std::max<Eigen::Index>(block, kk / 4);
  Eigen::Index next_check = std::min<Eigen::Index>(n, kk + 2 * block);
  bool converged = false;

  while (!converged) {
    if (expanded < m) {
      Eigen::VectorXd x = factor.solve(Q.col(expanded));
      const double xnorm = x.norm();
      const Eigen::VectorXd h = orthogonalize(Q, m, x);
      H.block(0, expanded, m, 1) = h;
      const double nrm = x.norm();
      if (m < n) {
        if (nrm > 1e-10 * xnorm) {
          ensure_capacity(m + 1);
          Q.col(m) = x / nrm;
          H(m, expanded) = nrm;
          ++m;
        } else {
          append_random();  // invariant subspace found; restart a direction
        }
      }
      ++expanded;
    }

    const bool exhausted = expanded >= m;
    if (expanded < next_check && !exhausted && expanded < cap) continue;
    next_check = expanded + check_every;

    const Eigen::Index p = expanded;
    if (p < kk) {
      if (exhausted || expanded >= cap) break;
      continue;
    }
    Eigen::MatrixXd Hp = H.topLeftCorner(p, p);
    Hp = 0.5 * (Hp + Hp.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz_solver(Hp);
    theta = ritz_solver.eigenvalues().tail(kk).reverse();
    ritz = ritz_solver.eigenvectors().rightCols(kk).rowwise().reverse();
    const Eigen::MatrixXd coupling = H.block(p, 0, m - p, p);
    residual.resize(kk);
    converged = true;
    for (Eigen::Index i = 0; i < kk; ++i) {
      residual[i] = m > p ? (coupling * ritz.col(i)).norm() : 0.0;
      if (residual[i] > options.tolerance * std::abs(theta[i])) converged = false;
    }
    if (converged || exhausted || expanded >= cap) break;
  }

  if (!converged) {
    Error err(ErrorCode::SolverFailure,
              "eigensolver did not converge within Krylov dimension " + std::to_string(expanded));
    err.values.assign(residual.data(), residual.data() + residual.size());
    throw err;
  }

  const Eigen::Index p = expanded;
  EigenSystem out;
  out.krylov_dimension = static_cast<std::size_t>(p);
  Eigen::MatrixXd X = Q.leftCols(p) * ritz;  // orthonormal in the transformed space
  Eigen::MatrixXd Phi = dinv.asDiagonal() * X;

  Eigen::VectorXd lambda(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    const double bnorm2 = (Phi.col(i).array().square() * op.mass.array()).sum();
    Phi.col(i) /= std::sqrt(bnorm2);
    lambda[i] = Phi.col(i).dot(op.stiffness * Phi.col(i));
    // Deterministic sign: largest-magnitude entry positive.
    Eigen::Index at = 0;
    Phi.col(i).cwiseAbs().maxCoeff(&at);
    if (Phi(at, i) < 0.0) Phi.col(i) *= -1.0;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(kk));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return lambda[a] < lambda[b]; });
  out.eigenvalues.resize(kk);
  out.eigenvectors.resize(n, kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    out.eigenvalues[i] = lambda[order[static_cast<std::size_t>(i)]];
    out.eigenvectors.col(i) = Phi.col(order[static_cast<std::size_t>(i)]);
  }
  out.min_unclamped = out.eigenvalues.minCoeff();
  // Gershgorin bound on the whole spectrum; the reference scale for deciding
  // that an eigenvalue is numerically zero even when k is small.
  double gershgorin = 0.0;
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) sum += std::abs(it.value());
    gershgorin = std::max(gershgorin, sum);
  }
  const double scale = std::max(out.eigenvalues.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < kk; ++i) {
    double& l = out.eigenvalues[i];
    if ((l < 0.0 && l >= -1e-8 * std::max(scale, gershgorin)) || std::abs(l) <= 1e-12 * gershgorin)
      l = 0.0;
  }
  return out;
}

}  // namespace lapshape
