#include "fermigas/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fermigas/errors.hpp"

namespace fermigas {

namespace {

EigenPair dense_lowest(const MatVec& apply, Eigen::Index dim) {
  Eigen::MatrixXd a(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    a.col(j) = col;
    e[j] = 0.0;
  }
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
  EigenPair out;
  out.value = es.eigenvalues()[0];
  out.vector = es.eigenvectors().col(0);
  apply(out.vector, col);
  out.residual = (col - out.value * out.vector).norm();
  out.iterations = static_cast<int>(dim);
  out.method = "dense";
  return out;
}

}  // namespace

EigenPair lowest_eigenpair(const MatVec& apply, Eigen::Index dim, const LanczosOptions& opts) {
  if (dim <= 0) throw ValidationError("eigenproblem of dimension 0");
  if (dim < opts.dense_below) return dense_lowest(apply, dim);

  const int k = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, dim));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  v.normalize();

  Eigen::MatrixXd basis(dim, k);
  Eigen::VectorXd w(dim), alpha(k), beta(k);
  EigenPair best;
  best.method = "lanczos";
  int matvecs = 0;
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    basis.col(0) = v;
    int used = k;
    for (int j = 0; j < k; ++j) {
      apply(basis.col(j), w);
      ++matvecs;
      alpha[j] = basis.col(j).dot(w);
      // two passes of classical Gram-Schmidt against the whole basis
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = basis.leftCols(j + 1).transpose() * w;
        w.noalias() -= basis.leftCols(j + 1) * c;
      }
      beta[j] = w.norm();
      if (j + 1 == k) break;
      if (beta[j] < 1e-13 * std::max(1.0, std::abs(alpha[j]))) {
        used = j + 1;
        break;
      }
      basis.col(j + 1) = w / beta[j];
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (int j = 0; j < used; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    Eigen::VectorXd x = basis.leftCols(used) * s;
    x.normalize();
    Eigen::VectorXd ax(dim);
    apply(x, ax);
    ++matvecs;
    const double theta = x.dot(ax);
    const double res = (ax - theta * x).norm();
    best.value = theta;
    best.vector = x;
    best.residual = res;
    best.iterations = matvecs;
    if (res <= opts.tol) return best;
    v = x;
  }
  return best;
}

}  // namespace fermigas
