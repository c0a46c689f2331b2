#include "spdpool/spectral.hpp"

namespace spdpool {

EigenPair sym_eig(const SymMatrix& x) {
  if (x.dim() == 0) {
    throw std::invalid_argument("cannot decompose an empty matrix");
  }
  if (!x.mat().allFinite()) {
    throw NumericalError("non-finite matrix entry");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }

  const Eigen::Index d = x.dim();
  EigenPair pair;
  pair.U.resize(d, d);
  pair.sigma.resize(d);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index j = 0; j < d; ++j) {
    pair.sigma(j) = solver.eigenvalues()(d - 1 - j);
    pair.U.col(j) = solver.eigenvectors().col(d - 1 - j);
  }
  // Sign convention: first largest-magnitude component positive.
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index top = 0;
    double best = std::abs(pair.U(0, j));
    for (Eigen::Index i = 1; i < d; ++i) {
      const double mag = std::abs(pair.U(i, j));
      if (mag > best) {
        best = mag;
        top = i;
      }
    }
    if (pair.U(top, j) < 0.0) pair.U.col(j) = -pair.U.col(j);
  }
  return pair;
}

SymMatrix reconstruct(const EigenPair& pair) {
  return SymMatrix::symmetrized(pair.U * pair.sigma.asDiagonal() *
                                pair.U.transpose());
}

}  // namespace spdpool
