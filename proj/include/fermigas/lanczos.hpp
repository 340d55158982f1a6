#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace fermigas {

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct EigenPair {
  double value = 0;
  Eigen::VectorXd vector;
  double residual = 0;  // ||A x - value x||
  int iterations = 0;   // matrix-vector products
  std::string method;   // "dense" or "lanczos"
};

struct LanczosOptions {
  double tol = 1e-9;
  int krylov_dim = 80;
  int max_restarts = 300;
  unsigned long long seed = 7;
  Eigen::Index dense_below = 2000;
};

// Lowest eigenpair of a real symmetric operator.  Restarted Lanczos with full
// reorthogonalisation, dense diagonalisation below opts.dense_below.
EigenPair lowest_eigenpair(const MatVec& apply, Eigen::Index dim, const LanczosOptions& opts = {});

}  // namespace fermigas
